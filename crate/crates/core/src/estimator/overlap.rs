use serde::{Deserialize, Serialize};

use super::EstimateError;

/// How known navigation costs are combined into an estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NavEstimatorMode {
    /// `sum(c_i * P_i / 100)` over every record.
    Literal,
    /// Convex combination weighted by `P_i / 200`, with a path-length fallback.
    #[default]
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapParams {
    /// Distance (m) at or beyond which two points count as not overlapping.
    pub epsilon_d: f64,
    #[serde(default)]
    pub mode: NavEstimatorMode,
}

impl Default for OverlapParams {
    fn default() -> Self {
        Self {
            epsilon_d: 1.0,
            mode: NavEstimatorMode::Normalized,
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean over points of `from` of the distance to the nearest point of `to`.
pub fn mean_closest_distance(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| to.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min))
        .sum();
    total / from.len() as f64
}

/// Symmetric overlap score in [0, 200]: each direction contributes
/// `100 * (1 - d / eps)` with the mean closest distance `d` clamped to `eps`.
pub fn path_overlap(p_i: &[[f64; 2]], p_j: &[[f64; 2]], params: &OverlapParams) -> Result<f64, EstimateError> {
    if p_i.is_empty() || p_j.is_empty() {
        return Err(EstimateError::EmptyPath);
    }
    if params.epsilon_d.is_nan() || params.epsilon_d <= 0.0 {
        return Err(EstimateError::BadParams(format!("epsilon_d = {}", params.epsilon_d)));
    }
    let eps = params.epsilon_d;
    let term = |d: f64| 100.0 * (1.0 - d.min(eps) / eps);
    Ok(term(mean_closest_distance(p_i, p_j)) + term(mean_closest_distance(p_j, p_i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(eps: f64) -> OverlapParams {
        OverlapParams {
            epsilon_d: eps,
            mode: NavEstimatorMode::Normalized,
        }
    }

    #[test]
    fn identical_paths_score_200() {
        let p = [[0.0, 0.0], [0.25, 0.0], [0.5, 0.25]];
        assert_eq!(path_overlap(&p, &p, &params(1.0)).unwrap(), 200.0);
    }

    #[test]
    fn parallel_lines_one_meter_apart() {
        // nearest distance from every point is exactly 1 m: 2 * 100 * (1 - 1/2)
        let a = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let b = [[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
        assert!((path_overlap(&a, &b, &params(2.0)).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn far_paths_clamp_to_zero() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let b = [[0.0, 5.0], [1.0, 7.0]];
        assert_eq!(path_overlap(&a, &b, &params(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn empty_path_rejected() {
        assert_eq!(
            path_overlap(&[], &[[0.0, 0.0]], &params(1.0)),
            Err(EstimateError::EmptyPath)
        );
    }

    fn points() -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| [x, y]), 1..20)
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in points(), b in points(), eps in 0.1f64..5.0) {
            let ab = path_overlap(&a, &b, &params(eps)).unwrap();
            let ba = path_overlap(&b, &a, &params(eps)).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=200.0).contains(&ab));
        }

        #[test]
        fn moving_away_never_increases(a in points(), shift in 0.0f64..3.0, extra in 0.0f64..3.0) {
            // translate a copy of `a` along +y, which cannot shrink any nearest
            // distance when `a` lies on a horizontal line
            let line: Vec<[f64; 2]> = a.iter().map(|p| [p[0], 0.0]).collect();
            let near: Vec<[f64; 2]> = line.iter().map(|p| [p[0], shift]).collect();
            let far: Vec<[f64; 2]> = line.iter().map(|p| [p[0], shift + extra]).collect();
            let p = params(2.0);
            prop_assert!(path_overlap(&line, &far, &p).unwrap() <= path_overlap(&line, &near, &p).unwrap());
        }
    }
}
