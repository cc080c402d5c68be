//! A 2-D joint grid solved exactly, by brute force and by beam search.

use lamp_motion::planner::{brute_force, plan_on_grid, value_iteration, GridMDP, PlannerConfig};

fn main() -> lamp_motion::Result<()> {
    // a bright spot off the direct route
    let dims = vec![5, 5];
    let mut scores = vec![0.0; 25];
    // row-major, dimension 0 fastest: cells (3, 1) and (4, 1)
    scores[3 + 5] = 1.0;
    scores[4 + 5] = 0.5;
    let mdp = GridMDP {
        dims,
        horizon: 6,
        start: vec![0, 0],
        goal: vec![0, 3],
        scores,
    };
    for gamma in [0.0, 0.5, 2.0] {
        let (u, path) = value_iteration(&mdp, gamma)?;
        let (ub, _) = brute_force(&mdp, gamma)?;
        let narrow = PlannerConfig {
            beam_width: 2,
            ..Default::default()
        };
        let (beam_u, _) = plan_on_grid(&mdp, gamma, &narrow)?;
        println!("gamma {gamma}: VI {u} (brute force {ub}, beam-2 {beam_u}) via {path:?}");
    }
    Ok(())
}
