use std::f64::consts::PI;

use super::state::{check_collisions, VortexState};
use crate::greens::{grad_green_standard, green_standard, GreensEvaluator};
use crate::surface::{chordal_distance, stereo_lift, stereo_project, PlaneCoord, SpherePoint, TangentVector};
use crate::{Error, Result, Vec3};

/// `H = Σ_{i<j} κ_i κ_j G̃(s_i, s_j) + ½ Σ κ_i² R̃(s_i)`.
pub fn hamiltonian(ev: &GreensEvaluator, st: &VortexState) -> Result<f64> {
    check_collisions(st.positions())?;
    let (p, k) = (st.positions(), st.strengths());
    let mut h = 0.0;
    for i in 0..p.len() {
        h += 0.5 * k[i] * k[i] * ev.robin(&p[i]);
        for j in i + 1..p.len() {
            h += k[i] * k[j] * ev.green(&p[i], &p[j])?;
        }
    }
    Ok(h)
}

/// The same Hamiltonian assembled from the round one:
/// `H₀ − (1/4π) Σ κ_j² ln h(s_j) − (κ/Ã) Σ κ_j u(s_j)`. It differs from
/// [`hamiltonian`] by the state-independent constant `c̃ κ²/2`.
pub fn hamiltonian_conformal_rule(ev: &GreensEvaluator, st: &VortexState) -> Result<f64> {
    check_collisions(st.positions())?;
    let (p, k) = (st.positions(), st.strengths());
    let m = ev.metric();
    let total = st.total_strength();
    let mut h = 0.0;
    for i in 0..p.len() {
        h += 0.5 * k[i] * k[i] * ev.robin_constant();
        h -= k[i] * k[i] * m.ln_h(&p[i]) / (4.0 * PI);
        h -= total / m.total_area() * k[i] * ev.u_value(&p[i]);
        for j in i + 1..p.len() {
            h += k[i] * k[j] * green_standard(&p[i], &p[j])?;
        }
    }
    Ok(h)
}

/// `∇₀_{s_j} H` for every vortex.
pub fn hamiltonian_gradients(ev: &GreensEvaluator, st: &VortexState) -> Result<Vec<Vec3>> {
    check_collisions(st.positions())?;
    let (p, k) = (st.positions(), st.strengths());
    let n = p.len();
    let mut grads = vec![Vec3::zeros(); n];
    for i in 0..n {
        let (_, gl) = ev.metric().h_and_grad_ln_h(&p[i]);
        grads[i] -= gl * (k[i] * k[i] / (4.0 * PI));
        for j in i + 1..n {
            let g0 = grad_green_standard(&p[i], &p[j])?;
            let g0_rev = grad_green_standard(&p[j], &p[i])?;
            grads[i] += g0 * (k[i] * k[j]);
            grads[j] += g0_rev * (k[i] * k[j]);
        }
    }
    // −(κ/Ã) Σ κ_j u(s_j) collects every smooth pair and self correction
    let scale = st.total_strength() / ev.metric().total_area();
    if scale != 0.0 && !ev.metric().is_constant() {
        for i in 0..n {
            grads[i] -= ev.grad_u(&p[i]) * (scale * k[i]);
        }
    }
    Ok(grads)
}

/// Solves `κ_j h²(s_j) ω₀(ṡ_j, ·) = d_{s_j}H`: `ṡ_j = s_j × ∇_j H / (κ_j h_j²)`.
pub fn vortex_velocities(ev: &GreensEvaluator, st: &VortexState) -> Result<Vec<TangentVector>> {
    if let Some(j) = st.strengths().iter().position(|k| *k == 0.0) {
        return Err(Error::InvalidParameter(format!("massless vortex {j} has zero strength")));
    }
    let grads = hamiltonian_gradients(ev, st)?;
    Ok(st
        .positions()
        .iter()
        .zip(st.strengths())
        .zip(grads)
        .map(|((s, k), g)| {
            let h = ev.metric().h(s);
            TangentVector::new(*s, s.rotate(&g) / (k * h * h))
        })
        .collect())
}

/// `sgrad R̃ = s × ∇₀R̃ / h²`. A lone vortex of strength κ moves with
/// `κ/2` times this field, since its energy is `κ² R̃/2`.
pub fn single_vortex_field(ev: &GreensEvaluator, s: &SpherePoint) -> TangentVector {
    let h = ev.metric().h(s);
    TangentVector::new(*s, s.rotate(&ev.grad_robin(s)) / (h * h))
}

/// Collective stream function `ψ(s) = Σ κ_j G̃(s, s_j)`.
pub fn stream_function(ev: &GreensEvaluator, s: &SpherePoint, st: &VortexState) -> Result<f64> {
    st.positions()
        .iter()
        .zip(st.strengths())
        .map(|(p, k)| Ok(k * ev.green(s, p)?))
        .sum()
}

/// Velocity of a passive marker: `sgrad ψ`.
pub fn marker_velocity(ev: &GreensEvaluator, s: &SpherePoint, st: &VortexState) -> Result<TangentVector> {
    let mut g = Vec3::zeros();
    for (p, k) in st.positions().iter().zip(st.strengths()) {
        g += ev.grad_green(s, p)? * *k;
    }
    let h = ev.metric().h(s);
    Ok(TangentVector::new(*s, s.rotate(&g) / (h * h)))
}

fn require_zero_total(st: &VortexState) -> Result<()> {
    let scale = st.strengths().iter().fold(0.0f64, |a, k| a.max(k.abs()));
    if st.total_strength().abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "requires zero total strength, got {}",
            st.total_strength()
        )));
    }
    Ok(())
}

/// Zero-total-strength Hamiltonian with no spectral terms:
/// `(1/8π) Σ_{j≠l} κ_j κ_l ln(h(s_j) h(s_l) |s_j − s_l|²)`.
/// Equal to [`hamiltonian`] up to a constant when `Σκ = 0`.
pub fn reduced_hamiltonian(ev: &GreensEvaluator, st: &VortexState) -> Result<f64> {
    require_zero_total(st)?;
    check_collisions(st.positions())?;
    let (p, k) = (st.positions(), st.strengths());
    let m = ev.metric();
    let mut h = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let d = chordal_distance(&p[i], &p[j]);
            h += k[i] * k[j] * (m.ln_h(&p[i]) + m.ln_h(&p[j]) + 2.0 * d.ln());
        }
    }
    Ok(h / (4.0 * PI))
}

/// Velocities generated by [`reduced_hamiltonian`].
pub fn reduced_velocities(ev: &GreensEvaluator, st: &VortexState) -> Result<Vec<TangentVector>> {
    require_zero_total(st)?;
    check_collisions(st.positions())?;
    let (p, k) = (st.positions(), st.strengths());
    let m = ev.metric();
    let mut out = Vec::with_capacity(p.len());
    for j in 0..p.len() {
        let (h, gl) = m.h_and_grad_ln_h(&p[j]);
        let mut g = Vec3::zeros();
        for l in 0..p.len() {
            if l == j {
                continue;
            }
            let diff = p[j].vec() - p[l].vec();
            g += (gl + p[j].tangent_part(&diff) * (2.0 / diff.norm_squared())) * (k[j] * k[l]);
        }
        g /= 4.0 * PI;
        out.push(TangentVector::new(p[j], p[j].rotate(&g) / (k[j] * h * h)));
    }
    Ok(out)
}

/// Planar point-vortex equations in the stereographic chart from the north
/// pole, for a flat-conformal metric `H²|dz|²` with `H = h · 2/(1+|z|²)`:
///
/// `H_j² dz̄_j/dt = σ i [ Σ_{l≠j} κ̂_l / (z_l − z_j) + κ̂_j ∂_z ln H(z_j) ]`,
///
/// `κ̂ = κ/2π`, `σ = −1` because the chart reverses orientation. Needs
/// `Σκ = 0` (no background vorticity). Returns `(dx/dt, dy/dt)` per vortex.
pub fn planar_velocities(ev: &GreensEvaluator, st: &VortexState) -> Result<Vec<PlaneCoord>> {
    require_zero_total(st)?;
    let m = ev.metric();
    let zs = st.positions().iter().map(stereo_project).collect::<Result<Vec<_>>>()?;
    let sigma = -1.0;
    let mut out = Vec::with_capacity(zs.len());
    for (j, zj) in zs.iter().enumerate() {
        let kj = st.strengths()[j] / (2.0 * PI);
        // Σ κ̂_l / (z_l − z_j) as a complex number (re, im)
        let (mut re, mut im) = (0.0, 0.0);
        for (l, zl) in zs.iter().enumerate() {
            if l == j {
                continue;
            }
            let (dx, dy) = (zl.x - zj.x, zl.y - zj.y);
            let r2 = dx * dx + dy * dy;
            let kl = st.strengths()[l] / (2.0 * PI);
            re += kl * dx / r2;
            im -= kl * dy / r2;
        }
        // ∂_z ln H = ½(∂_x − i ∂_y) ln H
        let (lx, ly) = grad_ln_conformal_plane(m, zj);
        re += kj * 0.5 * lx;
        im -= kj * 0.5 * ly;
        // multiply by σ i: (re + i im) i = −im + i re
        let (wr, wi) = (-sigma * im, sigma * re);
        let s = stereo_lift(zj);
        let big_h = m.h(&s) * 2.0 / (1.0 + zj.norm_sqr());
        let h2 = big_h * big_h;
        // z̄̇ = (wr + i wi)/H² ⇒ ż = (wr − i wi)/H²
        out.push(PlaneCoord::new(wr / h2, -wi / h2));
    }
    Ok(out)
}

/// `(∂_x, ∂_y)` of `ln(h(s(z)) · 2/(1+|z|²))`.
fn grad_ln_conformal_plane(m: &crate::surface::ConformalMetric, z: &PlaneCoord) -> (f64, f64) {
    let (x, y) = (z.x, z.y);
    let r2 = x * x + y * y;
    let q = 1.0 + r2;
    let s = stereo_lift(z);
    let (_, g) = m.h_and_grad_ln_h(&s);
    // s = (2x, 2y, r² − 1)/(1 + r²)
    let ds_dx = Vec3::new(2.0 * q - 4.0 * x * x, -4.0 * x * y, 2.0 * x * q - 2.0 * x * (r2 - 1.0)) / (q * q);
    let ds_dy = Vec3::new(-4.0 * x * y, 2.0 * q - 4.0 * y * y, 2.0 * y * q - 2.0 * y * (r2 - 1.0)) / (q * q);
    (g.dot(&ds_dx) - 2.0 * x / q, g.dot(&ds_dy) - 2.0 * y / q)
}
