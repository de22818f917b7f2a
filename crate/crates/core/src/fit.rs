//! Minimum-distance estimation of location and scale.
//!
//! The objective `(m, s) -> d(F̂_x, F_{m,s})` is piecewise smooth with kinks
//! wherever the active order statistic changes, so it is minimized with a
//! derivative-free Nelder–Mead simplex. Coordinates are standardized against
//! the robust starting point, `m = m0 + s0 * a`, `s = s0 * exp(b)`, which makes
//! the search (and its tolerance) invariant under affine maps of the data.

use crate::error::{param, Error, Result};
use crate::metrics::{deviations_to_cdf, MetricKind};
use crate::models::LocationScaleFamily;
use crate::sample::SortedSample;

/// Simplex-diameter tolerance in standardized coordinates.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;
/// Iteration cap per start.
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedParams {
    pub m: f64,
    pub s: f64,
    pub achieved_distance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    point: [f64; 2],
    value: f64,
    converged: bool,
    iterations: usize,
}

/// Nelder–Mead with the standard coefficients (1, 2, 1/2, 1/2).
fn nelder_mead(
    f: &impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Outcome {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(f);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);

        let diameter = (1..3)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = (simplex[i], simplex[j]);
                (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
            })
            .fold(0.0f64, f64::max);
        if diameter <= tol {
            converged = true;
            break;
        }

        let centroid = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let along = |coef: f64| {
            [
                centroid[0] + coef * (simplex[2][0] - centroid[0]),
                centroid[1] + coef * (simplex[2][1] - centroid[1]),
            ]
        };

        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[2] {
            let c = along(-0.5);
            (c, f(c))
        } else {
            let c = along(0.5);
            (c, f(c))
        };
        if fc < values[2].min(fr) {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for k in 1..3 {
            simplex[k] = [
                simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
            ];
            values[k] = f(simplex[k]);
        }
    }

    let best = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Outcome {
        point: simplex[best],
        value: values[best],
        converged,
        iterations,
    }
}

/// Nelder–Mead restarted from its own optimum until a restart stops
/// improving, within a shared iteration budget. Restarting with a fresh
/// simplex escapes the premature collapse typical on kinked objectives.
fn minimize_with_restarts(f: &impl Fn([f64; 2]) -> f64, start: [f64; 2], budget: usize) -> Outcome {
    let mut remaining = budget;
    let mut step = 0.25;
    let mut best = Outcome {
        point: start,
        value: f(start),
        converged: false,
        iterations: 0,
    };
    while remaining > 0 {
        let run = nelder_mead(f, best.point, step, SIMPLEX_TOLERANCE, remaining);
        remaining -= run.iterations.max(1);
        let improved = run.value < best.value - 1e-15;
        if run.value <= best.value {
            best = Outcome { converged: run.converged, ..run };
        }
        if !run.converged {
            break;
        }
        if !improved {
            best.converged = true;
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    best
}

fn objective(x: &SortedSample, family: &LocationScaleFamily, metric: MetricKind, m: f64, s: f64) -> f64 {
    let g = family
        .member(m, s)
        .expect("scale floor keeps the member valid");
    let (p, q) = deviations_to_cdf(x, &g);
    match metric {
        MetricKind::Ks => p.max(q),
        _ => p + q,
    }
}

/// Minimizes `d(F̂_x, F_{m,s})` over the family for `metric` in {KS, Kuiper}.
///
/// Three starts are tried: the robust point `(median, IQR / base IQR)` and the
/// same with the scale halved and doubled; the best result is returned.
pub fn fit_min_distance(
    family: &LocationScaleFamily,
    x: &SortedSample,
    metric: MetricKind,
) -> Result<FittedParams> {
    if !matches!(metric, MetricKind::Ks | MetricKind::Kuiper) {
        return param(format!(
            "minimum-distance fitting supports ks and kuiper only, got {metric}"
        ));
    }
    if x.len() < 3 {
        return param(format!("minimum-distance fitting needs n >= 3, got {}", x.len()));
    }
    let range = x.max() - x.min();
    if range <= 0.0 {
        return Err(Error::Estimation(
            "all sample values are equal; no positive scale fits".into(),
        ));
    }
    let scale_floor = 1e-12 * (range + 1.0);

    let base = family.base();
    let base_iqr = base.quantile(0.75) - base.quantile(0.25);
    let base_median = base.quantile(0.5);
    let mut iqr = x.quantile(0.75) - x.quantile(0.25);
    if iqr <= 0.0 {
        iqr = range / 2.0;
    }
    let s0 = (iqr / base_iqr).max(scale_floor);
    let m0 = x.median() - s0 * base_median;

    let to_params = |p: [f64; 2]| {
        let s = (s0 * p[1].exp()).clamp(scale_floor, f64::MAX);
        (m0 + s0 * p[0], s)
    };
    let f = |p: [f64; 2]| {
        let (m, s) = to_params(p);
        objective(x, family, metric, m, s)
    };

    let starts = [0.0, -std::f64::consts::LN_2, std::f64::consts::LN_2];
    let runs: Vec<Outcome> = starts
        .iter()
        .map(|&b| minimize_with_restarts(&f, [0.0, b], MAX_ITERATIONS))
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .copied()
        .unwrap();
    let (m, s) = to_params(best.point);
    Ok(FittedParams {
        m,
        s,
        achieved_distance: best.value,
        converged: runs.iter().any(|r| r.converged),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ks_to_cdf;
    use crate::models::{BaseFamily, ContinuousCdf};
    use crate::rng::RngStream;

    fn normal_family() -> LocationScaleFamily {
        LocationScaleFamily::new(BaseFamily::Normal)
    }

    #[test]
    fn nelder_mead_minimizes_a_quadratic() {
        let f = |p: [f64; 2]| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 2.0).powi(2);
        let out = nelder_mead(&f, [0.0, 0.0], 0.5, 1e-9, 1000);
        assert!(out.converged);
        assert!((out.point[0] - 1.0).abs() < 1e-6 && (out.point[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_handles_kinks() {
        let f = |p: [f64; 2]| (p[0] - 0.3).abs().max((p[1] + 0.7).abs() * 2.0);
        let out = minimize_with_restarts(&f, [2.0, 2.0], 500);
        assert!(out.value < 1e-5, "value {}", out.value);
    }

    #[test]
    fn attains_floor_at_exact_quantiles() {
        let n = 10;
        let fam = normal_family();
        let g = fam.member(2.0, 3.0).unwrap();
        let x = SortedSample::new(
            (1..=n).map(|i| g.quantile((2 * i - 1) as f64 / (2 * n) as f64)).collect(),
        )
        .unwrap();
        let fit = fit_min_distance(&fam, &x, MetricKind::Ks).unwrap();
        assert!((fit.achieved_distance - 0.05).abs() < 1e-4, "{fit:?}");
        assert!((fit.m - 2.0).abs() < 0.05 && (fit.s - 3.0).abs() < 0.1, "{fit:?}");
        assert!(fit.converged);
    }

    #[test]
    fn never_worse_than_fixed_member() {
        let x = SortedSample::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let fit = fit_min_distance(&normal_family(), &x, MetricKind::Ks).unwrap();
        assert!(fit.achieved_distance <= ks_to_cdf(&x, &ContinuousCdf::standard(BaseFamily::Normal)));
        assert!(fit.achieved_distance >= 1.0 / 6.0 - 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let fam = normal_family();
        let flat = SortedSample::new(vec![2.0; 5]).unwrap();
        assert!(matches!(fit_min_distance(&fam, &flat, MetricKind::Ks), Err(Error::Estimation(_))));
        let small = SortedSample::new(vec![1.0, 2.0]).unwrap();
        assert!(fit_min_distance(&fam, &small, MetricKind::Ks).is_err());
        let ok = SortedSample::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert!(fit_min_distance(&fam, &ok, MetricKind::Cvm).is_err());
    }

    #[test]
    fn dominance_floor_and_equivariance() {
        let mut rng = RngStream::new(5150);
        for trial in 0..100 {
            let base = BaseFamily::ALL[trial % 5];
            let fam = LocationScaleFamily::new(base);
            let metric = if trial % 2 == 0 { MetricKind::Ks } else { MetricKind::Kuiper };
            let n = 3 + rng.below(60);
            let data = ContinuousCdf::standard(BaseFamily::ALL[rng.below(5)]).sample_n(n, &mut rng);
            let x = SortedSample::new(data.clone()).unwrap();
            let fit = fit_min_distance(&fam, &x, metric).unwrap();

            // Dominance over the robust starting member.
            let b = fam.base();
            let s0 = (x.quantile(0.75) - x.quantile(0.25)) / (b.quantile(0.75) - b.quantile(0.25));
            if s0 > 0.0 {
                let m0 = x.median() - s0 * b.quantile(0.5);
                let start = fam.member(m0, s0).unwrap();
                let (p, q) = deviations_to_cdf(&x, &start);
                let d0 = if metric == MetricKind::Ks { p.max(q) } else { p + q };
                assert!(fit.achieved_distance <= d0 + 1e-9);
            }
            assert!(fit.achieved_distance >= 1.0 / (2.0 * n as f64) - 1e-12);

            let a = 0.01 + 50.0 * rng.uniform();
            let c = 100.0 * (rng.uniform() - 0.5);
            let y = SortedSample::new(data.iter().map(|v| a * v + c).collect()).unwrap();
            let fy = fit_min_distance(&fam, &y, metric).unwrap();
            assert!((fy.achieved_distance - fit.achieved_distance).abs() < 1e-5, "{trial}: {fit:?} {fy:?}");
        }
    }
}
