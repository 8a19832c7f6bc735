//! Independent reference implementations used by the integration tests.
//! None of them shares code with the library beyond its public types.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `r[τ] = Σ x[n]·x[n+τ]`, summed from the far end of the frame.
pub fn direct_autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            let mut acc = 0.0;
            let mut n = x.len();
            while n > lag {
                n -= 1;
                acc += x[n] * x[n - lag];
            }
            acc
        })
        .collect()
}

/// Solves the Yule-Walker system `R a = r[1..=p]` with a dense LU.
pub fn toeplitz_solve(r: &[f64], p: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(p, p, |i, j| r[i.abs_diff(j)]);
    let rhs = DVector::from_fn(p, |i, _| r[i + 1]);
    m.lu().solve(&rhs).expect("nonsingular Toeplitz system").iter().copied().collect()
}

/// Eigenvalues of the companion matrix of the monic polynomial
/// `z^n + c[0] z^(n−1) + … + c[n−1]`.
pub fn companion_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    m.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Coefficients (descending, leading 1 dropped) of `Π (z − root)`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        p = next;
    }
    p[1..].iter().map(|c| c.re).collect()
}

/// Random real polynomial roots strictly inside the unit circle: conjugate
/// pairs plus, for odd orders, one real root.
pub fn random_stable_roots(rng: &mut ChaCha8Rng, order: usize) -> Vec<Complex64> {
    let mut roots = Vec::with_capacity(order);
    for k in 0..order / 2 {
        let r = rng.random_range(0.3..0.97);
        let sector = PI / (order / 2) as f64;
        let theta = sector * (k as f64 + rng.random_range(0.15..0.85));
        roots.push(Complex64::from_polar(r, theta));
        roots.push(Complex64::from_polar(r, -theta));
    }
    if order % 2 == 1 {
        roots.push(Complex64::new(rng.random_range(-0.9..0.9), 0.0));
    }
    roots
}

/// Largest distance between the two root sets under a greedy nearest
/// matching.
pub fn root_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut free: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for z in a {
        let (i, d) = free
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        free.swap_remove(i);
    }
    worst
}

/// Magnitude of the DTFT of `x` at frequency `f`.
pub fn dtft_magnitude(x: &[f64], rate: f64, f: f64) -> f64 {
    let w = 2.0 * PI * f / rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, v) in x.iter().enumerate() {
        re += v * (w * n as f64).cos();
        im -= v * (w * n as f64).sin();
    }
    (re * re + im * im).sqrt()
}

/// Frequency of the largest DTFT magnitude: a scan at `coarse` Hz spacing
/// up to Nyquist, refined at 0.05 Hz around the winner.
pub fn spectral_peak(x: &[f64], rate: f64, coarse: f64) -> f64 {
    let mut best = (0.0, -1.0);
    let mut f = coarse;
    while f < rate / 2.0 {
        let m = dtft_magnitude(x, rate, f);
        if m > best.1 {
            best = (f, m);
        }
        f += coarse;
    }
    let (lo, hi) = (best.0 - coarse, best.0 + coarse);
    let mut f = lo;
    while f <= hi {
        let m = dtft_magnitude(x, rate, f);
        if m > best.1 {
            best = (f, m);
        }
        f += 0.05;
    }
    best.0
}

/// Power spectrum `|X_k|²` of a Hann-windowed block at bins `0..=n/2`.
pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let w: Vec<f64> = (0..n)
        .map(|i| x[i] * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()))
        .collect();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in w.iter().enumerate() {
                let a = 2.0 * PI * (k * i % n) as f64 / n as f64;
                re += v * a.cos();
                im -= v * a.sin();
            }
            re * re + im * im
        })
        .collect()
}

fn gini_exact(labels: &[usize], n_classes: usize) -> Rational64 {
    let n = labels.len() as i64;
    let mut g = Rational64::from_integer(1);
    for c in 0..n_classes {
        let k = labels.iter().filter(|&&l| l == c).count() as i64;
        g -= Rational64::new(k * k, n * n);
    }
    g
}

/// Brute-force CART over a small dataset, in exact arithmetic.
pub struct CartOracle<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl CartOracle<'_> {
    /// `(feature, threshold, gain)` of the best split: every midpoint of every
    /// feature is tried, the partition is recomputed from scratch and the
    /// first strict maximum wins.
    pub fn best(&self, samples: &[usize], features: &[usize]) -> Option<(usize, f64, Rational64)> {
        let ys: Vec<usize> = samples.iter().map(|&i| self.labels[i]).collect();
        let parent = gini_exact(&ys, self.n_classes);
        let n = samples.len() as i64;
        let mut best: Option<(usize, f64, Rational64)> = None;
        for &f in features {
            let mut values: Vec<f64> = samples.iter().map(|&i| self.rows[i][f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| self.rows[i][f] <= t);
                let ly: Vec<usize> = l.iter().map(|&i| self.labels[i]).collect();
                let ry: Vec<usize> = r.iter().map(|&i| self.labels[i]).collect();
                let gain = parent
                    - Rational64::new(ly.len() as i64, n) * gini_exact(&ly, self.n_classes)
                    - Rational64::new(ry.len() as i64, n) * gini_exact(&ry, self.n_classes);
                if gain > Rational64::from_integer(0) && best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((f, t, gain));
                }
            }
        }
        best
    }

    /// Prediction of the fully grown tree (all features at every node).
    pub fn predict(&self, samples: &[usize], x: &[f64]) -> usize {
        let all: Vec<usize> = (0..self.rows[0].len()).collect();
        match (samples.len() >= 2).then(|| self.best(samples, &all)).flatten() {
            Some((f, t, _)) => {
                let side: Vec<usize> = samples.iter().copied().filter(|&i| (self.rows[i][f] <= t) == (x[f] <= t)).collect();
                self.predict(&side, x)
            }
            None => {
                let mut counts = vec![0usize; self.n_classes];
                for &i in samples {
                    counts[self.labels[i]] += 1;
                }
                (0..self.n_classes).fold(0, |b, c| if counts[c] > counts[b] { c } else { b })
            }
        }
    }
}

/// Up to 30 rows × 5 features on a coarse value grid, so ties are common.
pub fn random_cart_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = rng.random_range(2..=30);
    let p = rng.random_range(1..=5);
    let levels = rng.random_range(2..=8);
    let rows = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(0..levels) as f64 * 0.5 - 1.0).collect())
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..3)).collect();
    (rows, labels)
}
