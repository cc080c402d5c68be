//! A small enumerable MDP over one or two discretized joints, solved exactly
//! by finite-horizon dynamic programming.
//!
//! The utility of a path `s_0 .. s_T` is the sum over `t = 1..=T` of
//! `1(s_t = goal) + gamma * score(s_t)`.

use serde::{Deserialize, Serialize};

use super::PlannerConfig;
use crate::error::{Error, Result};

/// Grid moves, in tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GridAction {
    Stay,
    Dec0,
    Inc0,
    Dec1,
    Inc1,
}

impl GridAction {
    pub const ALL: [GridAction; 5] = [
        GridAction::Stay,
        GridAction::Dec0,
        GridAction::Inc0,
        GridAction::Dec1,
        GridAction::Inc1,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMDP {
    /// Positions per dimension (one or two dimensions, 1..=15 each).
    pub dims: Vec<usize>,
    /// Number of steps `T` (at most 30).
    pub horizon: usize,
    pub start: Vec<usize>,
    pub goal: Vec<usize>,
    /// Expressive score per cell, row-major with dimension 0 fastest.
    pub scores: Vec<f64>,
}

impl GridMDP {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("grid MDP: {m}")));
        if self.dims.is_empty() || self.dims.len() > 2 {
            return bad("one or two dimensions");
        }
        if self.dims.iter().any(|d| *d == 0 || *d > 15) {
            return bad("each dimension needs 1..=15 positions");
        }
        if self.horizon > 30 {
            return bad("horizon at most 30");
        }
        let inside = |c: &[usize]| c.len() == self.dims.len() && c.iter().zip(&self.dims).all(|(v, d)| v < d);
        if !inside(&self.goal) {
            return bad("goal cell outside grid");
        }
        if !inside(&self.start) {
            return bad("start cell outside grid");
        }
        if self.scores.len() != self.cells() || self.scores.iter().any(|s| !s.is_finite()) {
            return bad("score table must be finite with one entry per cell");
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        match cell.len() {
            1 => cell[0],
            _ => cell[0] + self.dims[0] * cell[1],
        }
    }

    pub fn cell(&self, index: usize) -> Vec<usize> {
        match self.dims.len() {
            1 => vec![index],
            _ => vec![index % self.dims[0], index / self.dims[0]],
        }
    }

    /// Actions available in this grid (moves along missing dimensions are
    /// not offered).
    pub fn actions(&self) -> &'static [GridAction] {
        if self.dims.len() == 1 {
            &GridAction::ALL[..3]
        } else {
            &GridAction::ALL
        }
    }

    /// Successor cell index; moves off the grid stay in place.
    pub fn step(&self, index: usize, action: GridAction) -> usize {
        let mut c = self.cell(index);
        let (dim, up) = match action {
            GridAction::Stay => return index,
            GridAction::Dec0 => (0, false),
            GridAction::Inc0 => (0, true),
            GridAction::Dec1 => (1, false),
            GridAction::Inc1 => (1, true),
        };
        if up && c[dim] + 1 < self.dims[dim] {
            c[dim] += 1;
        } else if !up && c[dim] > 0 {
            c[dim] -= 1;
        }
        self.index(&c)
    }

    /// Steps along a shortest path between two cells.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.cell(a), self.cell(b));
        ca.iter().zip(&cb).map(|(x, y)| x.abs_diff(*y)).sum()
    }

    /// Reward for occupying a cell.
    pub fn reward(&self, index: usize, gamma: f64) -> f64 {
        let at_goal = if index == self.index(&self.goal) { 1.0 } else { 0.0 };
        at_goal + gamma * self.scores[index]
    }
}

/// Utility of a cell path, summed forward from `t = 1`.
pub fn path_utility(mdp: &GridMDP, gamma: f64, path: &[Vec<usize>]) -> f64 {
    path.iter().skip(1).map(|c| mdp.reward(mdp.index(c), gamma)).sum()
}

/// Exact finite-horizon value iteration. Returns the optimal utility and a
/// maximizing path (`T + 1` cells); ties go to the earliest action.
pub fn value_iteration(mdp: &GridMDP, gamma: f64) -> Result<(f64, Vec<Vec<usize>>)> {
    mdp.validate()?;
    let n = mdp.cells();
    let t_max = mdp.horizon;
    let actions = mdp.actions();
    let mut value = vec![0.0; n];
    // policy[t][s]: best action at step t from cell s
    let mut policy = vec![vec![GridAction::Stay; n]; t_max];
    for t in (0..t_max).rev() {
        let mut next = vec![0.0; n];
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for &a in actions {
                let s2 = mdp.step(s, a);
                let v = mdp.reward(s2, gamma) + value[s2];
                if v > best {
                    best = v;
                    policy[t][s] = a;
                }
            }
            next[s] = best;
        }
        value = next;
    }
    let mut s = mdp.index(&mdp.start);
    let mut path = vec![mdp.cell(s)];
    for step in policy.iter() {
        s = mdp.step(s, step[s]);
        path.push(mdp.cell(s));
    }
    Ok((value[mdp.index(&mdp.start)], path))
}

/// Enumerates every action sequence. Exponential; for oracle checks on
/// short horizons.
pub fn brute_force(mdp: &GridMDP, gamma: f64) -> Result<(f64, Vec<Vec<usize>>)> {
    mdp.validate()?;
    let actions = mdp.actions();
    let start = mdp.index(&mdp.start);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut seq = vec![0usize; mdp.horizon];
    loop {
        let mut s = start;
        let mut u = 0.0;
        let mut path = vec![start];
        for &a in &seq {
            s = mdp.step(s, actions[a]);
            u += mdp.reward(s, gamma);
            path.push(s);
        }
        if u > best.0 {
            best = (u, path);
        }
        // odometer increment, last position fastest
        let mut i = mdp.horizon;
        loop {
            if i == 0 {
                let cells = best.1.iter().map(|s| mdp.cell(*s)).collect();
                return Ok((best.0, cells));
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < actions.len() {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// `routes[a][b]`: the most reward collectable along a shortest route from
/// `a` to `b`, counting `b` but not `a`.
fn route_values(mdp: &GridMDP, gamma: f64) -> Vec<Vec<f64>> {
    let n = mdp.cells();
    (0..n)
        .map(|a| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|c| mdp.distance(a, *c));
            let mut best = vec![f64::NEG_INFINITY; n];
            best[a] = 0.0;
            for &c in &order[1..] {
                let d = mdp.distance(a, c);
                for &act in &mdp.actions()[1..] {
                    let prev = mdp.step(c, act);
                    if prev != c && mdp.distance(a, prev) + 1 == d {
                        best[c] = best[c].max(best[prev] + mdp.reward(c, gamma));
                    }
                }
            }
            best
        })
        .collect()
}

/// Best utility over `steps` from `from` among "take a best shortest route
/// to one cell, then stay there" plans. Achievable, so never above the optimum.
fn route_and_dwell(mdp: &GridMDP, routes: &[Vec<f64>], from: usize, steps: usize, gamma: f64) -> f64 {
    (0..mdp.cells())
        .filter_map(|c| {
            let d = mdp.distance(from, c);
            (d <= steps).then(|| routes[from][c] + (steps - d) as f64 * mdp.reward(c, gamma))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Forward beam search over grid actions, keeping at most
/// `config.beam_width` partial paths per step (one per cell). Partial paths
/// are ranked by utility so far plus the best "shortest route to one cell,
/// then stay" continuation, so a flat score table still leads to the goal.
pub fn plan_on_grid(mdp: &GridMDP, gamma: f64, config: &PlannerConfig) -> Result<(f64, Vec<Vec<usize>>)> {
    mdp.validate()?;
    if config.beam_width == 0 {
        return Err(Error::InvalidConfig("beam_width must be at least 1".into()));
    }
    let actions = mdp.actions();
    let start = mdp.index(&mdp.start);
    let routes = route_values(mdp, gamma);
    // (utility so far, path of cell indices)
    let mut beam: Vec<(f64, Vec<usize>)> = vec![(0.0, vec![start])];
    for _ in 0..mdp.horizon {
        let mut by_cell: Vec<Option<(f64, Vec<usize>)>> = vec![None; mdp.cells()];
        for (u, path) in &beam {
            let s = *path.last().unwrap();
            for &a in actions {
                let s2 = mdp.step(s, a);
                let u2 = u + mdp.reward(s2, gamma);
                if by_cell[s2].as_ref().is_none_or(|(best, _)| u2 > *best) {
                    let mut p = path.clone();
                    p.push(s2);
                    by_cell[s2] = Some((u2, p));
                }
            }
        }
        let next: Vec<(f64, Vec<usize>)> = by_cell.into_iter().flatten().collect();
        let left = mdp.horizon + 1 - next[0].1.len();
        // rank by utility so far plus a route-and-dwell lookahead; stable,
        // so equal keys keep cell order
        let mut keyed: Vec<(f64, (f64, Vec<usize>))> = next
            .into_iter()
            .map(|e| (e.0 + route_and_dwell(mdp, &routes, *e.1.last().unwrap(), left, gamma), e))
            .collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut next: Vec<(f64, Vec<usize>)> = keyed.into_iter().map(|(_, e)| e).collect();
        next.truncate(config.beam_width);
        beam = next;
    }
    beam.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (u, path) = beam.into_iter().next().expect("beam is never empty");
    Ok((u, path.into_iter().map(|s| mdp.cell(s)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_dwell() {
        let mdp = GridMDP {
            dims: vec![1],
            horizon: 5,
            start: vec![0],
            goal: vec![0],
            scores: vec![0.25],
        };
        let (u, path) = value_iteration(&mdp, 2.0).unwrap();
        assert_eq!(u, 5.0 * (1.0 + 2.0 * 0.25));
        assert_eq!(path.len(), 6);
    }

    #[test]
    fn adjacent_goal_three_steps() {
        let mdp = GridMDP {
            dims: vec![3],
            horizon: 3,
            start: vec![1],
            goal: vec![2],
            scores: vec![0.0; 3],
        };
        let (u, path) = value_iteration(&mdp, 0.0).unwrap();
        assert_eq!(u, 3.0);
        assert_eq!(path, vec![vec![1], vec![2], vec![2], vec![2]]);
        assert_eq!(brute_force(&mdp, 0.0).unwrap().0, 3.0);
    }

    #[test]
    fn rejects_bad_grid() {
        let mdp = GridMDP {
            dims: vec![16],
            horizon: 3,
            start: vec![0],
            goal: vec![0],
            scores: vec![0.0; 16],
        };
        assert!(value_iteration(&mdp, 0.0).is_err());
    }
}
