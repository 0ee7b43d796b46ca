//! Fully normalized associated Legendre functions.
//!
//! `q(l, m)` is `N_lm P_l^m(cos θ)` with `N_lm = sqrt((2l+1)/(4π) (l-m)!/(l+m)!)`
//! and no Condon–Shortley phase. For `m ≥ 1` the table also keeps
//! `q(l, m) / sin θ`, which stays finite at the poles and is what the
//! longitudinal gradient component needs.

#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

#[derive(Debug, Clone)]
pub(crate) struct LegendreTable {
    pub q: Vec<f64>,
    /// q / sin θ for m ≥ 1 (entries with m = 0 are unused and zero).
    pub q_over_sin: Vec<f64>,
}

impl LegendreTable {
    /// Tabulates all functions up to `degree` at `cos θ = x`, `sin θ = s ≥ 0`.
    pub fn new(degree: usize, x: f64, s: f64) -> Self {
        let n = tri(degree, degree) + 1;
        let mut q = vec![0.0; n];
        let mut qs = vec![0.0; n];
        let inv4pi = 1.0 / (4.0 * std::f64::consts::PI);

        // m = 0
        let seed0 = inv4pi.sqrt();
        fill_column(degree, 0, x, seed0, &mut q);

        // m ≥ 1: seed c_m sin^{m-1}, recurse in l, then q = sin · qs
        let mut cm = 1.0f64; // prod_{k=1..m} (2k-1)/(2k)
        let mut spow = 1.0f64; // sin^{m-1}
        for m in 1..=degree {
            cm *= (2 * m - 1) as f64 / (2 * m) as f64;
            if m > 1 {
                spow *= s;
            }
            let seed = ((2 * m + 1) as f64 * inv4pi * cm).sqrt() * spow;
            fill_column(degree, m, x, seed, &mut qs);
            for l in m..=degree {
                q[tri(l, m)] = s * qs[tri(l, m)];
            }
        }
        Self {
            q,
            q_over_sin: qs,
        }
    }

    #[inline]
    pub fn q(&self, l: usize, m: usize) -> f64 {
        self.q[tri(l, m)]
    }

    /// d q(l, m) / dθ.
    pub fn dq_dtheta(&self, l: usize, m: usize) -> f64 {
        let (lf, mf) = (l as f64, m as f64);
        if m == 0 {
            if l == 0 {
                return 0.0;
            }
            return -(lf * (lf + 1.0)).sqrt() * self.q(l, 1);
        }
        let lower = ((lf + mf) * (lf - mf + 1.0)).sqrt() * self.q(l, m - 1);
        let upper = if m < l {
            ((lf + mf + 1.0) * (lf - mf)).sqrt() * self.q(l, m + 1)
        } else {
            0.0
        };
        0.5 * (lower - upper)
    }
}

fn fill_column(degree: usize, m: usize, x: f64, seed: f64, out: &mut [f64]) {
    out[tri(m, m)] = seed;
    if m == degree {
        return;
    }
    let mf = m as f64;
    let mut prev2 = seed;
    let mut prev1 = (2.0 * mf + 3.0).sqrt() * x * seed;
    out[tri(m + 1, m)] = prev1;
    for l in (m + 2)..=degree {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let cur = a * (x * prev1 - b * prev2);
        out[tri(l, m)] = cur;
        prev2 = prev1;
        prev1 = cur;
    }
}
