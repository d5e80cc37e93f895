//! Successor representations: discounted sums of transition-matrix powers,
//! and the value functions they induce.

use crate::env::TransitionMatrix;
use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Discount and horizon for the truncated successor sum. `horizon: None`
/// means "sum until the geometric tail vanishes", which requires gamma < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrConfig {
    pub gamma: f64,
    pub horizon: Option<usize>,
}

impl SrConfig {
    pub fn new(gamma: f64, horizon: usize) -> Self {
        SrConfig {
            gamma,
            horizon: Some(horizon),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "discount factor must lie in [0,1], got {}",
                self.gamma
            )));
        }
        if self.horizon.is_none() && self.gamma >= 1.0 {
            return Err(Error::Config("gamma = 1 requires a finite horizon".into()));
        }
        Ok(())
    }
}

/// M = sum over t of gamma^t T^t, with the configuration that produced it.
#[derive(Debug, Clone)]
pub struct SuccessorMatrix {
    mat: Mat,
    config: SrConfig,
}

impl SuccessorMatrix {
    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn config(&self) -> &SrConfig {
        &self.config
    }

    pub fn n_states(&self) -> usize {
        self.mat.rows()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.mat.row(s)
    }
}

// Tail threshold for horizon-free accumulation of the geometric series.
const INFINITE_TAIL_EPS: f64 = 1e-15;
const INFINITE_STEP_CAP: usize = 100_000;

/// Accumulate the discounted power series by iterated multiply-accumulate:
/// starts at the identity (the t = 0 term), so a zero horizon or a zero
/// discount yields exactly I.
pub fn successor_matrix(tp: &TransitionMatrix, config: &SrConfig) -> Result<SuccessorMatrix> {
    config.validate()?;
    let n = tp.n_states();
    let mut acc = Mat::identity(n);
    let mut power = Mat::identity(n);
    let mut weight = 1.0;
    let steps = match config.horizon {
        Some(h) => h,
        None => INFINITE_STEP_CAP,
    };
    for _ in 0..steps {
        weight *= config.gamma;
        if weight == 0.0 {
            break;
        }
        if config.horizon.is_none() && weight < INFINITE_TAIL_EPS {
            break;
        }
        power = power.matmul(tp.mat())?;
        acc.add_scaled(&power, weight)?;
    }
    Ok(SuccessorMatrix {
        mat: acc,
        config: *config,
    })
}

/// Per-state reward values; defaults to all ones so that the value function
/// reduces to discounted expected occupancy.
#[derive(Debug, Clone)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("reward values must be finite".into()));
        }
        Ok(RewardVector(values))
    }

    pub fn uniform(n: usize) -> Self {
        RewardVector(vec![1.0; n])
    }

    /// All mass on a single goal state.
    pub fn point_mass(n: usize, goal: usize, mass: f64) -> Result<Self> {
        if goal >= n {
            return Err(Error::StateOutOfRange {
                state: goal,
                n_states: n,
            });
        }
        let mut v = vec![0.0; n];
        v[goal] = mass;
        Ok(RewardVector(v))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// V(s) = sum over s' of M(s,s') R(s').
pub fn value_function(sr: &SuccessorMatrix, rewards: &RewardVector) -> Result<Vec<f64>> {
    let n = sr.n_states();
    if rewards.len() != n {
        return Err(Error::Shape(format!(
            "reward vector has {} entries for {} states",
            rewards.len(),
            n
        )));
    }
    let r = rewards.values();
    Ok((0..n)
        .map(|s| sr.row(s).iter().zip(r).map(|(m, rv)| m * rv).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_grid_room, build_language_space, ground_truth_tp, LexiconSpec};
    use approx::assert_abs_diff_eq;

    fn two_cycle() -> TransitionMatrix {
        let mat = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        TransitionMatrix::new(mat, vec![false, false], 1e-12).unwrap()
    }

    #[test]
    fn zero_horizon_gives_identity() {
        let sr = successor_matrix(&two_cycle(), &SrConfig::new(0.9, 0)).unwrap();
        assert_eq!(sr.mat(), &Mat::identity(2));
    }

    #[test]
    fn zero_gamma_gives_identity() {
        let sr = successor_matrix(&two_cycle(), &SrConfig::new(0.0, 25)).unwrap();
        assert_eq!(sr.mat(), &Mat::identity(2));
    }

    #[test]
    fn two_state_swap_series() {
        // I + 0.5*T + 0.25*T^2 for the swap matrix
        let sr = successor_matrix(&two_cycle(), &SrConfig::new(0.5, 2)).unwrap();
        let expect = Mat::from_rows(&[vec![1.25, 0.5], vec![0.5, 1.25]]).unwrap();
        assert_eq!(sr.mat().sub(&expect).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn language_question_row_t2_gamma1() {
        let spec = LexiconSpec::default_spec();
        let space = build_language_space(&spec).unwrap();
        let tp = ground_truth_tp(&space);
        let sr = successor_matrix(&tp, &SrConfig::new(1.0, 2)).unwrap();
        let q = 36;
        let row = sr.row(q);
        assert_abs_diff_eq!(row[q], 1.0, epsilon = 1e-12);
        for p in 30..35 {
            assert_abs_diff_eq!(row[p], 0.2, epsilon = 1e-12);
        }
        for v in 10..20 {
            assert_abs_diff_eq!(row[v], 0.1, epsilon = 1e-12);
        }
        // nothing else receives mass
        let covered: f64 = row[q] + 5.0 * 0.2 + 10.0 * 0.1;
        assert_abs_diff_eq!(row.iter().sum::<f64>(), covered, epsilon = 1e-12);
    }

    #[test]
    fn gamma_one_without_horizon_rejected() {
        let cfg = SrConfig {
            gamma: 1.0,
            horizon: None,
        };
        assert!(matches!(
            successor_matrix(&two_cycle(), &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gamma_out_of_range_rejected() {
        assert!(successor_matrix(&two_cycle(), &SrConfig::new(1.5, 3)).is_err());
        assert!(successor_matrix(&two_cycle(), &SrConfig::new(-0.1, 3)).is_err());
    }

    #[test]
    fn row_sum_law() {
        // for a row-stochastic T every SR row sums to the geometric partial sum
        let room = build_grid_room(10, 10).unwrap();
        let tp = ground_truth_tp(&room);
        let gamma = 0.9;
        let horizon = 10;
        let sr = successor_matrix(&tp, &SrConfig::new(gamma, horizon)).unwrap();
        let expected: f64 = (0..=horizon).map(|t| gamma.powi(t as i32)).sum();
        for s in 0..100 {
            assert_abs_diff_eq!(sr.row(s).iter().sum::<f64>(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn diagonal_at_least_one() {
        let room = build_grid_room(5, 5).unwrap();
        let sr = successor_matrix(&ground_truth_tp(&room), &SrConfig::new(0.9, 10)).unwrap();
        for s in 0..25 {
            assert!(sr.row(s)[s] >= 1.0);
        }
        assert!(sr.mat().data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn value_zero_rewards() {
        let room = build_grid_room(3, 3).unwrap();
        let sr = successor_matrix(&ground_truth_tp(&room), &SrConfig::new(0.5, 4)).unwrap();
        let v = value_function(&sr, &RewardVector::new(vec![0.0; 9]).unwrap()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn value_uniform_rewards_geometric_sum() {
        let room = build_grid_room(4, 4).unwrap();
        let sr = successor_matrix(&ground_truth_tp(&room), &SrConfig::new(0.5, 2)).unwrap();
        let v = value_function(&sr, &RewardVector::uniform(16)).unwrap();
        for &x in &v {
            assert_abs_diff_eq!(x, 1.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn value_point_mass_selects_column() {
        let room = build_grid_room(3, 3).unwrap();
        let sr = successor_matrix(&ground_truth_tp(&room), &SrConfig::new(0.7, 6)).unwrap();
        let goal = 4;
        let v = value_function(&sr, &RewardVector::point_mass(9, goal, 1.0).unwrap()).unwrap();
        for s in 0..9 {
            assert_eq!(v[s], sr.row(s)[goal]);
        }
    }

    #[test]
    fn value_shape_mismatch() {
        let room = build_grid_room(3, 3).unwrap();
        let sr = successor_matrix(&ground_truth_tp(&room), &SrConfig::new(0.5, 2)).unwrap();
        assert!(matches!(
            value_function(&sr, &RewardVector::uniform(4)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn nonfinite_rewards_rejected() {
        assert!(RewardVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn converged_series_matches_long_truncation() {
        let room = build_grid_room(4, 4).unwrap();
        let tp = ground_truth_tp(&room);
        let inf = successor_matrix(
            &tp,
            &SrConfig {
                gamma: 0.5,
                horizon: None,
            },
        )
        .unwrap();
        let long = successor_matrix(&tp, &SrConfig::new(0.5, 200)).unwrap();
        assert!(inf.mat().sub(long.mat()).unwrap().max_abs() < 1e-12);
    }
}
