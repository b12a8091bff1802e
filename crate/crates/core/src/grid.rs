use crate::error::{Error, Result};

/// Uniform partition 0 = t_0 < t_1 < … < t_M = T.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon T = {horizon} must be positive")));
        }
        if steps == 0 {
            return Err(Error::invalid("time grid needs at least one step"));
        }
        let nodes = (0..=steps)
            .map(|m| horizon * m as f64 / steps as f64)
            .collect();
        Ok(Self {
            horizon,
            steps,
            nodes,
        })
    }

    /// Grid with step `dt`, which must divide `horizon` to 1e-12 relative.
    pub fn with_step(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step dt = {dt} must be positive")));
        }
        let steps = (horizon / dt).round();
        if steps < 1.0 || ((steps * dt - horizon) / horizon).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "time step dt = {dt} does not divide T = {horizon}"
            )));
        }
        Self::new(horizon, steps as usize)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps M.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes, M + 1.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes() {
        let g = TimeGrid::new(1.0, 500).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[500], 1.0);
        assert!((g.dt() * 500.0 - 1.0).abs() < 1e-12);
        for w in g.nodes().windows(2) {
            assert!(((w[1] - w[0]) / g.dt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_must_divide_horizon() {
        assert_eq!(TimeGrid::with_step(1.0, 0.002).unwrap().steps(), 500);
        assert_eq!(TimeGrid::with_step(1.0, 0.0005).unwrap().steps(), 2000);
        assert!(TimeGrid::with_step(1.0, 0.3).is_err());
        assert!(TimeGrid::with_step(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }
}
