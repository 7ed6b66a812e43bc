//! Minimum sample counts required by three persistence-of-excitation conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    /// Partition-based condition: `((n-1)S^2 + (n+1)S) / 2`.
    pub ours: u64,
    /// Sparse-optimization condition: `n S^2`.
    pub bako: u64,
    /// Algebraic condition: `C(n+S, n) - 1`.
    pub vidal: u64,
}

fn check_args(n: u64, s: u64) -> Result<()> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidArgument("n and S must be >= 1".into()));
    }
    Ok(())
}

fn overflow(what: &str, n: u64, s: u64) -> Error {
    Error::Overflow(format!("{what} count for n={n}, S={s}"))
}

pub fn min_samples_ours(n: u64, s: u64) -> Result<u64> {
    check_args(n, s)?;
    let s2 = s.checked_mul(s).ok_or_else(|| overflow("partition", n, s))?;
    let a = (n - 1).checked_mul(s2);
    let b = (n + 1).checked_mul(s);
    let num = a
        .zip(b)
        .and_then(|(a, b)| a.checked_add(b))
        .ok_or_else(|| overflow("partition", n, s))?;
    // (n-1)S^2 + (n+1)S = S((n-1)S + n + 1); one of S, (n-1)S + n + 1 is even
    debug_assert_eq!(num % 2, 0);
    Ok(num / 2)
}

pub fn min_samples_bako(n: u64, s: u64) -> Result<u64> {
    check_args(n, s)?;
    s.checked_mul(s)
        .and_then(|s2| s2.checked_mul(n))
        .ok_or_else(|| overflow("sparse", n, s))
}

/// Exact binomial `C(n+S, n) - 1`; overflow is reported, never wrapped.
pub fn min_samples_vidal(n: u64, s: u64) -> Result<u64> {
    check_args(n, s)?;
    let total = n.checked_add(s).ok_or_else(|| overflow("algebraic", n, s))?;
    let k = n.min(s);
    // C(total, i) = C(total, i-1) * (total - k + i) / i, exact at every step
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c
            .checked_mul(total as u128 - k as u128 + i)
            .ok_or_else(|| overflow("algebraic", n, s))?
            / i;
    }
    u64::try_from(c - 1).map_err(|_| overflow("algebraic", n, s))
}

pub fn sample_counts(n: u64, s: u64) -> Result<SampleCounts> {
    Ok(SampleCounts {
        ours: min_samples_ours(n, s)?,
        bako: min_samples_bako(n, s)?,
        vidal: min_samples_vidal(n, s)?,
    })
}

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCell {
    pub n: u64,
    #[serde(rename = "S")]
    pub s: u64,
    pub ours: u64,
    pub bako: u64,
    pub vidal: u64,
}

impl CountCell {
    pub fn counts(&self) -> SampleCounts {
        SampleCounts {
            ours: self.ours,
            bako: self.bako,
            vidal: self.vidal,
        }
    }
}

/// All cells for `1..=n_max` x `1..=s_max`, row-major in `n`.
pub fn min_samples_table(n_max: u64, s_max: u64) -> Result<Vec<CountCell>> {
    check_args(n_max, s_max)?;
    let mut out = Vec::with_capacity((n_max * s_max) as usize);
    for n in 1..=n_max {
        for s in 1..=s_max {
            let c = sample_counts(n, s)?;
            out.push(CountCell {
                n,
                s,
                ours: c.ours,
                bako: c.bako,
                vidal: c.vidal,
            });
        }
    }
    Ok(out)
}
