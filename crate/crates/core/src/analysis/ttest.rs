use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TTestKind {
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Equal variances, pooled estimate.
    Pooled,
}

/// Two-tailed two-sample test of `mean(a) - mean(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub kind: TTestKind,
    pub diff: f64,
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn ttest(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid(format!(
            "t-test needs at least 2 samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::invalid("t-test samples must be finite"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let diff = ma - mb;
    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let df = if qa + qb > 0.0 {
                (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (qa + qb, df)
        }
        TTestKind::Pooled => {
            let df = na + nb - 2.0;
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (pooled * (1.0 / na + 1.0 / nb), df)
        }
    };
    let se = se2.sqrt();
    let (t, p) = if se == 0.0 {
        // both groups constant: identical means are indistinguishable, distinct ones certain
        if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = diff / se;
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(TTest { kind, diff, t, p, df })
}

/// Welch two-tailed test, the default for comparing repeated runs.
pub fn two_sample_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    ttest(a, b, TTestKind::Welch)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A1: [f64; 15] = [
        27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4,
    ];
    const A2: [f64; 15] = [
        27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4,
    ];

    #[test]
    fn textbook_fixture() {
        let w = two_sample_ttest(&A1, &A2).unwrap();
        assert!((w.t - -2.455356398286006).abs() < 1e-9);
        assert!((w.df - 24.988529290231416).abs() < 1e-9);
        assert!((w.p - 0.021378001462866985).abs() < 1e-9);
        let p = ttest(&A1, &A2, TTestKind::Pooled).unwrap();
        assert!((p.t - -2.455356398286006).abs() < 1e-9);
        assert!((p.p - 0.020544522734125933).abs() < 1e-9);
    }

    #[test]
    fn identical_lists() {
        let r = two_sample_ttest(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.diff, r.t, r.p), (0.0, 0.0, 1.0));
        let c = two_sample_ttest(&[4.0, 4.0], &[4.0, 4.0]).unwrap();
        assert_eq!((c.diff, c.p), (0.0, 1.0));
    }

    #[test]
    fn separated_groups() {
        let r = two_sample_ttest(&[0.0, 0.001, -0.001], &[1.0, 1.001, 0.999]).unwrap();
        assert!(r.p < 0.01);
        assert!(two_sample_ttest(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn symmetry() {
        let ab = two_sample_ttest(&A1, &A2).unwrap();
        let ba = two_sample_ttest(&A2, &A1).unwrap();
        assert_eq!(ab.diff, -ba.diff);
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
    }
}
