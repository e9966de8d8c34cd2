//! Reductions of survival curves to scalar risks, and regridding.

use crate::data::{RiskVector, SurvivalMatrix, TimeGrid};
use crate::error::{Error, Result};

/// Common evaluation grid end point and RMST horizon used by default.
pub const DEFAULT_HORIZON: f64 = 355.0;

pub fn default_grid() -> TimeGrid {
    TimeGrid::regular(0.0, DEFAULT_HORIZON, 1.0).expect("static grid is valid")
}

/// Linear interpolation of every row onto `dst`.
///
/// When the source grid starts after 0 the curve is anchored at `S(0) = 1`.
/// Past the last source point the last value is carried forward.
pub fn interpolate(sm: &SurvivalMatrix, dst: &TimeGrid) -> Result<SurvivalMatrix> {
    let src = sm.grid().points();
    let (xs, anchored): (Vec<f64>, bool) = if src[0] > 0.0 {
        (std::iter::once(0.0).chain(src.iter().copied()).collect(), true)
    } else {
        (src.to_vec(), false)
    };
    let rows = sm
        .rows()
        .map(|row| {
            let ys: Vec<f64> = if anchored {
                std::iter::once(1.0).chain(row.iter().copied()).collect()
            } else {
                row.to_vec()
            };
            dst.points().iter().map(|&t| linear_at(&xs, &ys, t)).collect()
        })
        .collect();
    SurvivalMatrix::new(dst.clone(), rows)
}

fn linear_at(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let k = xs.partition_point(|&x| x <= t);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[k - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if t == x0 {
        return ys[k - 1];
    }
    let w = (t - x0) / (x1 - x0);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

/// `M_i = 1 - S(t | x_i)` with step lookup on the grid.
pub fn risk_at_time(sm: &SurvivalMatrix, t: f64) -> Result<RiskVector> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t} must be nonnegative")));
    }
    let (k, _) = sm.grid().step_index(t);
    RiskVector::new(sm.rows().map(|row| 1.0 - row[k]).collect())
}

/// `M_i = sum_t -log S(t | x_i)` over the grid. Zeros are replaced by the
/// smallest positive entry of the whole matrix.
pub fn expected_mortality(sm: &SurvivalMatrix) -> Result<RiskVector> {
    let eps = sm
        .values()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .min_by(f64::total_cmp)
        .ok_or(Error::DegenerateMatrix)?;
    RiskVector::new(
        sm.rows()
            .map(|row| {
                row.iter()
                    .map(|&s| -(if s > 0.0 { s } else { eps }).ln())
                    .sum::<f64>()
            })
            .collect(),
    )
}

/// Negative restricted mean survival time up to `t_star`, as a left Riemann
/// sum: each grid point `t < t_star` contributes `S(t) * (min(next, t_star) - t)`,
/// the last grid point extending to `t_star`.
pub fn neg_rmst(sm: &SurvivalMatrix, t_star: f64) -> Result<RiskVector> {
    let pts = sm.grid().points();
    if !(t_star > pts[0]) {
        return Err(Error::InvalidParameter(format!(
            "RMST horizon {t_star} must exceed the first grid point {}",
            pts[0]
        )));
    }
    let widths: Vec<f64> = pts
        .iter()
        .enumerate()
        .take_while(|(_, &t)| t < t_star)
        .map(|(k, &t)| pts.get(k + 1).map_or(t_star, |&next| next.min(t_star)) - t)
        .collect();
    RiskVector::new(
        sm.rows()
            .map(|row| -row.iter().zip(&widths).map(|(s, w)| s * w).sum::<f64>())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(grid: &[f64], rows: Vec<Vec<f64>>) -> SurvivalMatrix {
        SurvivalMatrix::new(TimeGrid::new(grid.to_vec()).unwrap(), rows).unwrap()
    }

    #[test]
    fn interpolation_midpoint_identity_and_carry_forward() {
        let sm = matrix(&[0.0, 2.0], vec![vec![1.0, 0.5]]);
        let out = interpolate(&sm, &TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(out.row(0), &[1.0, 0.75, 0.5]);
        let same = interpolate(&sm, sm.grid()).unwrap();
        assert_eq!(same.row(0), sm.row(0));
        let far = interpolate(&sm, &TimeGrid::new(vec![2.0, 5.0]).unwrap()).unwrap();
        assert_eq!(far.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn interpolation_anchors_at_one_before_late_grid() {
        let sm = matrix(&[2.0, 4.0], vec![vec![0.6, 0.2]]);
        let out = interpolate(&sm, &TimeGrid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap()).unwrap();
        assert_eq!(out.row(0), &[1.0, 0.8, 0.6, 0.4]);
    }

    #[test]
    fn risk_at_time_examples() {
        let sm = matrix(&[0.0, 1.0], vec![vec![1.0, 0.2], vec![1.0, 0.8]]);
        assert_eq!(
            risk_at_time(&sm, 1.0).unwrap().values(),
            &[0.8, 0.19999999999999996]
        );
        assert_eq!(risk_at_time(&sm, 0.0).unwrap().values(), &[0.0, 0.0]);
    }

    #[test]
    fn expected_mortality_examples() {
        let ones = matrix(&[0.0, 1.0, 2.0], vec![vec![1.0; 3]]);
        assert_eq!(expected_mortality(&ones).unwrap().values(), &[0.0]);
        let e = std::f64::consts::E;
        let sm = matrix(&[1.0, 2.0], vec![vec![1.0 / e, 1.0 / (e * e)]]);
        assert!((expected_mortality(&sm).unwrap().values()[0] - 3.0).abs() < 1e-12);
        let zeros = matrix(&[1.0], vec![vec![0.0]]);
        assert_eq!(expected_mortality(&zeros), Err(Error::DegenerateMatrix));
    }

    #[test]
    fn expected_mortality_substitutes_zero() {
        let sm = matrix(&[0.0, 1.0, 2.0], vec![vec![1.0, 0.5, 0.0], vec![1.0, 0.6, 0.3]]);
        let m = expected_mortality(&sm).unwrap();
        assert!(m.values().iter().all(|v| v.is_finite()));
        assert!(m.values()[0] > m.values()[1]);
        // eps = 0.3: -ln 0.5 - ln 0.3
        assert!((m.values()[0] - (-(0.5f64).ln() - (0.3f64).ln())).abs() < 1e-15);
    }

    #[test]
    fn rmst_unit_rectangles() {
        let grid = TimeGrid::regular(0.0, 10.0, 1.0).unwrap();
        let sm = SurvivalMatrix::new(grid.clone(), vec![vec![1.0; 11]]).unwrap();
        assert_eq!(neg_rmst(&sm, 10.0).unwrap().values(), &[-10.0]);
        let mut zero_after = vec![0.0; 11];
        zero_after[0] = 1.0;
        let sm = SurvivalMatrix::new(grid, vec![zero_after]).unwrap();
        assert_eq!(neg_rmst(&sm, 10.0).unwrap().values(), &[-1.0]);
    }

    #[test]
    fn rmst_horizon_past_grid_extends_last_point() {
        let sm = matrix(&[0.0, 2.0], vec![vec![1.0, 0.5]]);
        // 1 * 2 + 0.5 * 3
        assert_eq!(neg_rmst(&sm, 5.0).unwrap().values(), &[-3.5]);
        assert!(neg_rmst(&sm, 0.0).is_err());
    }
}
