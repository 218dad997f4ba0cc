//! Monte Carlo Lyapunov exponents of i.i.d. integer matrix products.
//!
//! `top_lyapunov` renormalizes a single vector every step and accumulates
//! log norms with compensated summation (the 1e7-step oracle runs lose
//! nothing). `lyapunov_spectrum_qr` carries an orthonormal frame through a
//! modified Gram-Schmidt QR step and averages the log diagonal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MatrixFamily;
use crate::error::{Error, Result};
use crate::rng::{self, StreamPurpose};
use crate::scalar::Real;
use crate::transfer::ExponentEstimate;
use crate::util::{mean_stderr, Kahan};

/// Full exponent vector, sorted descending, with per-exponent standard errors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumEstimate<R> {
    pub exponents: Vec<R>,
    pub stderrs: Vec<R>,
}

impl<R: Real> SpectrumEstimate<R> {
    pub fn top(&self) -> R {
        self.exponents[0]
    }

    pub fn sum(&self) -> R {
        crate::util::kahan_sum(self.exponents.iter().copied())
    }

    pub fn sum_stderr(&self) -> R {
        crate::util::kahan_sum(self.stderrs.iter().copied())
    }
}

fn check_params(n_steps: usize, n_reps: usize) -> Result<()> {
    if n_steps < 1_000 {
        return Err(Error::InvalidParameter("n_steps must be >= 1000".into()));
    }
    if n_reps < 1 {
        return Err(Error::InvalidParameter("n_reps must be >= 1".into()));
    }
    Ok(())
}

fn random_unit<R: Real>(rng: &mut rand_chacha::ChaCha8Rng, dim: usize) -> Vec<R> {
    loop {
        let v: Vec<R> = (0..dim)
            .map(|_| R::of(2.0) * rng::uniform::<R>(rng) - R::one())
            .collect();
        let n2 = v.iter().fold(R::zero(), |a, &x| a + x * x);
        if n2 > R::of(0.01) && n2 <= R::one() {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Top exponent `lim (1/n) log ||A_{n-1} ... A_0 v||` by per-step
/// renormalization, averaged over `n_reps` independent replicas.
pub fn top_lyapunov<R: Real>(
    family: &MatrixFamily,
    seed: u64,
    n_steps: usize,
    n_reps: usize,
) -> Result<ExponentEstimate<R>> {
    check_params(n_steps, n_reps)?;
    let probs: Vec<R> = family.probs().iter().map(|&p| R::of(p)).collect();
    let reps: Vec<R> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::derive_stream(seed, StreamPurpose::TopLyapunov, rep as u64);
            let mut v = random_unit::<R>(&mut rng, family.dim());
            let mut acc = Kahan::new();
            // warm the vector into the top Oseledets direction before
            // accumulating, so the alignment transient costs no bias
            let warmup = 100usize;
            for step in 0..warmup + n_steps {
                let i = rng::pick_index(&mut rng, &probs);
                let w = family.matrices()[i].apply_vec(&v);
                let n = w.iter().fold(R::zero(), |a, &x| a + x * x).sqrt();
                if step >= warmup {
                    acc.add(n.ln());
                }
                v = w.into_iter().map(|x| x / n).collect();
            }
            acc.value() / R::of_usize(n_steps)
        })
        .collect();
    let (value, stderr) = mean_stderr(&reps);
    Ok(ExponentEstimate { value, stderr, n_samples: (n_steps * n_reps) as u64 })
}

fn qr_step<R: Real>(cols: &mut Vec<Vec<R>>, diag_logs: &mut [Kahan<R>]) {
    let d = cols.len();
    for c in 0..d {
        for p in 0..c {
            let r = dot(&cols[p], &cols[c]);
            for i in 0..d {
                let sub = r * cols[p][i];
                cols[c][i] = cols[c][i] - sub;
            }
        }
        let n = dot(&cols[c], &cols[c]).sqrt();
        diag_logs[c].add(n.ln());
        for x in &mut cols[c] {
            *x = *x / n;
        }
    }
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Whole spectrum by QR cocycle iteration; exponents sorted descending. For
/// GL(d,Z) families the exponents sum to zero up to statistical error.
pub fn lyapunov_spectrum_qr<R: Real>(
    family: &MatrixFamily,
    seed: u64,
    n_steps: usize,
    n_reps: usize,
) -> Result<SpectrumEstimate<R>> {
    check_params(n_steps, n_reps)?;
    let d = family.dim();
    let probs: Vec<R> = family.probs().iter().map(|&p| R::of(p)).collect();
    let reps: Vec<Vec<R>> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::derive_stream(seed, StreamPurpose::QrSpectrum, rep as u64);
            // random orthonormal start frame via Gram-Schmidt on random vectors
            let mut cols: Vec<Vec<R>> = (0..d).map(|_| random_unit::<R>(&mut rng, d)).collect();
            let mut discard = vec![Kahan::new(); d];
            qr_step(&mut cols, &mut discard);
            let mut logs = vec![Kahan::new(); d];
            let warmup = 100usize;
            for step in 0..warmup + n_steps {
                let i = rng::pick_index(&mut rng, &probs);
                let m = &family.matrices()[i];
                let mut imgs: Vec<Vec<R>> = cols.iter().map(|c| m.apply_vec(c)).collect();
                if step >= warmup {
                    qr_step(&mut imgs, &mut logs);
                } else {
                    let mut sink = vec![Kahan::new(); d];
                    qr_step(&mut imgs, &mut sink);
                }
                cols = imgs;
            }
            logs.into_iter().map(|k| k.value() / R::of_usize(n_steps)).collect()
        })
        .collect();
    let mut exponents = Vec::with_capacity(d);
    let mut stderrs = Vec::with_capacity(d);
    for k in 0..d {
        let samples: Vec<R> = reps.iter().map(|r| r[k]).collect();
        let (m, s) = mean_stderr(&samples);
        exponents.push(m);
        stderrs.push(s);
    }
    // QR already orders generically; enforce descending pairing.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| exponents[j].partial_cmp(&exponents[i]).unwrap());
    let exponents: Vec<R> = order.iter().map(|&i| exponents[i]).collect();
    let stderrs: Vec<R> = order.iter().map(|&i| stderrs[i]).collect();
    Ok(SpectrumEstimate { exponents, stderrs })
}
