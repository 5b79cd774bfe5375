//! FAST-MCD robust location/scatter: random elemental starts, two C-steps
//! each, full refinement of the best candidates by determinant. The score is
//! the squared Mahalanobis distance under the winning (location, scatter).

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

use super::{subset_covariance, subset_mean};

const RIDGE_RATIO: f64 = 1e-6;
const CSTEP_DET_TOL: f64 = 1e-9;
const MAX_CSTEPS: usize = 100;
const KEEP_BEST: usize = 5;

#[derive(Debug, Clone)]
pub struct McdModel {
    pub location: DVector<f64>,
    pub scatter: DMatrix<f64>,
    pub h: usize,
    /// Row indices of the winning h-subset.
    pub support: Vec<usize>,
    /// Log-determinant sequences recorded along every C-step iteration, one
    /// trace per refined candidate; each is non-increasing.
    pub logdet_traces: Vec<Vec<f64>>,
}

pub fn default_h(n: usize, p: usize) -> usize {
    (n + p + 1) / 2
}

/// Cholesky with a single ridge retry: lambda = RIDGE_RATIO * trace / p.
fn factor(cov: &DMatrix<f64>) -> Option<(Cholesky<f64, nalgebra::Dyn>, DMatrix<f64>)> {
    if let Some(c) = Cholesky::new(cov.clone()) {
        return Some((c, cov.clone()));
    }
    let p = cov.nrows();
    let ridge = RIDGE_RATIO * cov.trace() / p as f64;
    if !(ridge > 0.0) {
        return None;
    }
    let mut regularized = cov.clone();
    for j in 0..p {
        regularized[(j, j)] += ridge;
    }
    Cholesky::new(regularized.clone()).map(|c| (c, regularized))
}

fn log_det(chol: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.abs().max(f64::MIN_POSITIVE).ln()).sum::<f64>()
}

fn mahalanobis_sq(chol: &Cholesky<f64, nalgebra::Dyn>, mean: &DVector<f64>, row: &[f64]) -> f64 {
    let diff = DVector::from_iterator(row.len(), row.iter().zip(mean.iter()).map(|(x, m)| x - m));
    let solved = chol.solve(&diff);
    diff.dot(&solved)
}

struct Candidate {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    logdet: f64,
    support: Vec<usize>,
    trace: Vec<f64>,
}

/// One C-step: keep the h rows closest under (mean, cov), recompute both.
fn c_step(x: &FeatureMatrix, mean: &DVector<f64>, cov: &DMatrix<f64>, h: usize) -> Option<Candidate> {
    let (chol, _) = factor(cov)?;
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    let dists: Vec<f64> = (0..x.n_rows()).map(|i| mahalanobis_sq(&chol, mean, x.row(i))).collect();
    order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
    let support: Vec<usize> = order[..h].to_vec();

    let new_mean = subset_mean(x, &support);
    let new_cov = subset_covariance(x, &support, &new_mean);
    let (new_chol, new_cov) = factor(&new_cov)?;
    let logdet = log_det(&new_chol);
    Some(Candidate {
        mean: new_mean,
        cov: new_cov,
        logdet,
        support,
        trace: vec![logdet],
    })
}

fn run_start(x: &FeatureMatrix, h: usize, seed: u64) -> Option<Candidate> {
    let n = x.n_rows();
    let p = x.n_cols();
    let mut rng = rng_from(seed);
    let order: Vec<usize> = rand::seq::index::sample(&mut rng, n, n).into_vec();

    // Elemental (p+1)-subset, extended until its covariance factors.
    let mut size = p + 1;
    let (mean, cov) = loop {
        if size > n {
            return None;
        }
        let chosen = &order[..size];
        let mean = subset_mean(x, chosen);
        let cov = subset_covariance(x, chosen, &mean);
        if factor(&cov).is_some() {
            break (mean, cov);
        }
        size += 1;
    };

    // Two C-steps per start.
    let mut cand = c_step(x, &mean, &cov, h)?;
    let second = c_step(x, &cand.mean, &cand.cov, h)?;
    cand.trace.extend(second.trace.iter());
    Some(Candidate {
        trace: cand.trace,
        ..second
    })
}

fn refine(x: &FeatureMatrix, mut cand: Candidate, h: usize) -> Option<Candidate> {
    for _ in 0..MAX_CSTEPS {
        let prev = cand.logdet;
        let next = c_step(x, &cand.mean, &cand.cov, h)?;
        let mut trace = cand.trace.clone();
        trace.push(next.logdet);
        let converged = (prev - next.logdet).abs() < CSTEP_DET_TOL;
        cand = Candidate { trace, ..next };
        if converged {
            break;
        }
    }
    Some(cand)
}

pub fn fit_mcd(train: &FeatureMatrix, h: Option<usize>, n_starts: usize, seed: u64) -> Result<McdModel> {
    let n = train.n_rows();
    let p = train.n_cols();
    if n <= p + 1 {
        return Err(Error::InvalidParameter(format!(
            "mcd requires n_train > p + 1 (n = {n}, p = {p})"
        )));
    }
    let h = h.unwrap_or_else(|| default_h(n, p));
    if h <= p || h > n {
        return Err(Error::InvalidParameter(format!("mcd.h = {h} out of range ({p}, {n}]")));
    }
    if n_starts == 0 {
        return Err(Error::InvalidParameter("mcd.starts must be >= 1".into()));
    }

    let mut starts: Vec<Candidate> = (0..n_starts)
        .into_par_iter()
        .filter_map(|s| run_start(train, h, derive_seed(seed, s as u64)))
        .collect();
    if starts.is_empty() {
        return Err(Error::FitFailure {
            kind: "mcd",
            stage: "starts",
            message: "every elemental start produced a singular covariance".into(),
        });
    }

    starts.sort_by(|a, b| a.logdet.total_cmp(&b.logdet));
    starts.truncate(KEEP_BEST);

    let mut refined: Vec<Candidate> = starts
        .into_par_iter()
        .filter_map(|c| refine(train, c, h))
        .collect();
    if refined.is_empty() {
        return Err(Error::FitFailure {
            kind: "mcd",
            stage: "refinement",
            message: "all candidate covariances singular after ridge".into(),
        });
    }
    refined.sort_by(|a, b| a.logdet.total_cmp(&b.logdet));

    let logdet_traces: Vec<Vec<f64>> = refined.iter().map(|c| c.trace.clone()).collect();
    let best = refined.swap_remove(0);
    let (_, scatter) = factor(&best.cov).ok_or(Error::FitFailure {
        kind: "mcd",
        stage: "finalize",
        message: "winning scatter singular after ridge".into(),
    })?;
    Ok(McdModel {
        location: best.mean,
        scatter,
        h,
        support: best.support,
        logdet_traces,
    })
}

pub fn score_mcd(model: &McdModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let p = model.location.len();
    if x.n_cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: x.n_cols(),
        });
    }
    let chol = Cholesky::new(model.scatter.clone()).ok_or(Error::FitFailure {
        kind: "mcd",
        stage: "score",
        message: "stored scatter not positive definite".into(),
    })?;
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| mahalanobis_sq(&chol, &model.location, x.row(i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_synthetic;

    #[test]
    fn support_excludes_gross_outliers() {
        // 95 clean Gaussian rows plus 5 planted far outliers at the end.
        let clean = generate_synthetic(95, 1, 3, 0.0, 42).unwrap();
        let mut rows: Vec<Vec<f64>> = clean.features.rows().take(95).map(|r| r.to_vec()).collect();
        for i in 0..5 {
            rows.push(vec![50.0 + i as f64, -40.0, 60.0]);
        }
        let x = FeatureMatrix::from_rows(&rows, clean.features.column_names().to_vec()).unwrap();
        let model = fit_mcd(&x, None, 50, 7).unwrap();
        for i in 95..100 {
            assert!(!model.support.contains(&i), "outlier {i} in support");
        }
    }

    #[test]
    fn location_scores_zero() {
        let data = generate_synthetic(80, 1, 4, 0.0, 3).unwrap();
        let model = fit_mcd(&data.features, None, 20, 11).unwrap();
        let loc: Vec<f64> = model.location.iter().copied().collect();
        let q = FeatureMatrix::from_rows(&[loc], data.features.column_names().to_vec()).unwrap();
        let s = score_mcd(&model, &q).unwrap();
        assert!(s[0].abs() < 1e-12);
    }

    #[test]
    fn cstep_traces_non_increasing() {
        let data = generate_synthetic(120, 10, 4, 8.0, 5).unwrap();
        let model = fit_mcd(&data.features, None, 30, 9).unwrap();
        for trace in &model.logdet_traces {
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "C-step determinant increased: {w:?}");
            }
        }
    }

    #[test]
    fn final_determinant_beats_random_subsets() {
        let data = generate_synthetic(100, 8, 3, 10.0, 13).unwrap();
        let model = fit_mcd(&data.features, None, 40, 21).unwrap();
        let final_logdet = {
            let (c, _) = factor(&model.scatter).unwrap();
            log_det(&c)
        };
        let mut rng = rng_from(99);
        for _ in 0..10 {
            let subset = rand::seq::index::sample(&mut rng, data.features.n_rows(), model.h).into_vec();
            let mean = subset_mean(&data.features, &subset);
            let cov = subset_covariance(&data.features, &subset, &mean);
            if let Some((c, _)) = factor(&cov) {
                assert!(final_logdet <= log_det(&c) + 1e-9);
            }
        }
    }

    #[test]
    fn default_h_formula() {
        assert_eq!(default_h(100, 5), 53);
        assert_eq!(default_h(11, 2), 7);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = generate_synthetic(60, 6, 3, 6.0, 17).unwrap();
        let a = fit_mcd(&data.features, None, 20, 4).unwrap();
        let b = fit_mcd(&data.features, None, 20, 4).unwrap();
        assert_eq!(a.location, b.location);
        assert_eq!(a.scatter, b.scatter);
        assert_eq!(a.support, b.support);
    }
}
