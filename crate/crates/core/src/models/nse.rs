//! Galerkin truncation of the periodic Navier–Stokes equations.
//!
//! The velocity is expanded as `u(x) = Σ_κ û_κ e^{i k·x}`, `k = 2πκ/L`,
//! over integer wave vectors `0 < |κ|∞ ≤ N`. Each `û_κ` lives in the plane
//! orthogonal to `κ` (one polarization in 2D, two in 3D), so every
//! coordinate vector is a divergence-free, zero-mean field. Only the half
//! set `H` of wave vectors (first nonzero component positive) is stored;
//! `û_{-κ} = conj(û_κ)`.
//!
//! For `κ ∈ H` and polarization `j` the coordinates `(c, s)` encode
//! `û_κ^{(j)} = σ (c + i s)` with `σ = (2 L^d)^{-1/2}`, which makes the
//! coordinate basis L²-orthonormal.
//!
//! The transport term is a direct (alias-free) convolution over the
//! truncated index set, projected back onto the solenoidal basis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::system::{ModelKind, State};

const MAX_TRUNCATION_2D: u32 = 16;
const MAX_TRUNCATION_3D: u32 = 6;

/// Spatial dimension and polarization count for a Galerkin kind.
pub(crate) fn geometry(kind: ModelKind) -> (usize, usize) {
    match kind {
        ModelKind::GalerkinNse3d => (3, 2),
        _ => (2, 1),
    }
}

fn is_positive(k: [i32; 3]) -> bool {
    k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)))
}

/// Half set `H` in a fixed lexicographic order.
pub(crate) fn half_modes(space_dim: usize, n: u32) -> Vec<[i32; 3]> {
    let n = n as i32;
    let zr = if space_dim == 3 { -n..=n } else { 0..=0 };
    let mut out = Vec::new();
    for kx in 0..=n {
        for ky in -n..=n {
            for kz in zr.clone() {
                let k = [kx, ky, kz];
                if is_positive(k) {
                    out.push(k);
                }
            }
        }
    }
    out
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn as_f64(k: [i32; 3]) -> [f64; 3] {
    [k[0] as f64, k[1] as f64, k[2] as f64]
}

/// Orthonormal polarization vectors spanning the plane orthogonal to `κ`.
/// The same vectors serve `κ` and `-κ`.
fn polarizations(k: [i32; 3], space_dim: usize) -> [[f64; 3]; 2] {
    let kf = as_f64(k);
    if space_dim == 2 {
        let e = normalize([-kf[1], kf[0], 0.0]);
        return [e, [0.0; 3]];
    }
    let e1 = if k[0] == 0 && k[1] == 0 {
        [1.0, 0.0, 0.0]
    } else {
        normalize(cross(kf, [0.0, 0.0, 1.0]))
    };
    let e2 = normalize(cross(normalize(kf), e1));
    [e1, e2]
}

#[derive(Debug, Clone, Copy)]
struct Triad {
    out: u32,
    p: u32,
    q: u32,
    p_conj: bool,
    q_conj: bool,
    /// `e_p^{(i)} · k_q`
    cp: [f64; 2],
    /// `e_q^{(l)} · e_κ^{(j)}` indexed `[l][j]`
    cq: [[f64; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct GalerkinNse {
    spec: ModelSpec,
    space_dim: usize,
    pols: usize,
    modes: Vec<[i32; 3]>,
    /// Dense lookup over the box `[-N, N]^d`: `+(i+1)` for `κ = modes[i]`,
    /// `-(i+1)` for `κ = -modes[i]`, 0 for `κ = 0`.
    lookup: Vec<i32>,
    stokes: Vec<f64>,
    rates: Vec<f64>,
    forcing: State,
    triads: Vec<Triad>,
    sigma: f64,
}

impl GalerkinNse {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let (space_dim, pols) = geometry(spec.kind);
        let max = if space_dim == 3 {
            MAX_TRUNCATION_3D
        } else {
            MAX_TRUNCATION_2D
        };
        if spec.truncation > max {
            return Err(Error::InvalidModel(format!(
                "direct convolution supports truncation <= {max} for {}, got {}",
                spec.kind.name(),
                spec.truncation
            )));
        }
        let n = spec.truncation as i32;
        let modes = half_modes(space_dim, spec.truncation);
        let side = (2 * n + 1) as usize;
        let cells = side.pow(space_dim as u32);
        let mut lookup = vec![0i32; cells];
        let box_index = |k: [i32; 3]| -> usize {
            let mut idx = 0usize;
            for c in k.iter().take(space_dim) {
                idx = idx * side + (c + n) as usize;
            }
            idx
        };
        for (i, &k) in modes.iter().enumerate() {
            lookup[box_index(k)] = i as i32 + 1;
            lookup[box_index([-k[0], -k[1], -k[2]])] = -(i as i32 + 1);
        }

        let wave = 2.0 * PI / spec.period;
        let stokes: Vec<f64> = modes.iter().map(|&k| wave * wave * dot(as_f64(k), as_f64(k))).collect();
        let mut rates = Vec::with_capacity(modes.len() * pols * 2);
        for &lam in &stokes {
            rates.extend(std::iter::repeat_n(spec.nu * lam, 2 * pols));
        }

        let pol_vectors: Vec<[[f64; 3]; 2]> = modes.iter().map(|&k| polarizations(k, space_dim)).collect();

        // Triad table: output κ ∈ H, p in the full set, q = κ − p in the full set.
        let mut triads = Vec::new();
        let in_box = |k: [i32; 3]| k.iter().take(space_dim).all(|c| c.abs() <= n);
        for (o, &kappa) in modes.iter().enumerate() {
            for &pk in &modes {
                for sign in [1i32, -1] {
                    let p = [sign * pk[0], sign * pk[1], sign * pk[2]];
                    let q = [kappa[0] - p[0], kappa[1] - p[1], kappa[2] - p[2]];
                    if q == [0, 0, 0] || !in_box(q) {
                        continue;
                    }
                    let pl = lookup[box_index(p)];
                    let ql = lookup[box_index(q)];
                    let (p_idx, q_idx) = ((pl.unsigned_abs() - 1) as usize, (ql.unsigned_abs() - 1) as usize);
                    let kq = {
                        let f = as_f64(q);
                        [wave * f[0], wave * f[1], wave * f[2]]
                    };
                    let mut cp = [0.0; 2];
                    let mut cq = [[0.0; 2]; 2];
                    for i in 0..pols {
                        cp[i] = dot(pol_vectors[p_idx][i], kq);
                    }
                    for l in 0..pols {
                        for j in 0..pols {
                            cq[l][j] = dot(pol_vectors[q_idx][l], pol_vectors[o][j]);
                        }
                    }
                    if cp.iter().all(|c| c.abs() < 1e-14) {
                        continue;
                    }
                    triads.push(Triad {
                        out: o as u32,
                        p: p_idx as u32,
                        q: q_idx as u32,
                        p_conj: pl < 0,
                        q_conj: ql < 0,
                        cp,
                        cq,
                    });
                }
            }
        }

        let sigma = 1.0 / (2.0 * spec.period.powi(space_dim as i32)).sqrt();
        let mut model = Self {
            spec: spec.clone(),
            space_dim,
            pols,
            modes,
            lookup,
            stokes,
            rates,
            forcing: State::zeros(spec.id(), 0),
            triads,
            sigma,
        };
        model.forcing = model.build_forcing()?;
        Ok(model)
    }

    fn build_forcing(&self) -> Result<State> {
        let mut g = vec![0.0; self.dim()];
        for term in &self.spec.forcing {
            self.add_mode(&mut g, &term.mode, term.polarization, term.re, term.im)?;
        }
        Ok(State {
            model: self.spec.id(),
            coords: g,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn forcing(&self) -> &State {
        &self.forcing
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn polarization_count(&self) -> usize {
        self.pols
    }

    /// Stored wave vectors (the half set `H`).
    pub fn modes(&self) -> &[[i32; 3]] {
        &self.modes
    }

    /// Stokes eigenvalue `(2π|κ|/L)²` of the `i`-th stored mode.
    pub fn stokes_eigenvalue(&self, i: usize) -> f64 {
        self.stokes[i]
    }

    /// Position of `(κ, pol)` in the coordinate vector and whether `κ` is
    /// stored through its conjugate `-κ`.
    pub fn coord_index(&self, mode: &[i32], pol: usize) -> Result<(usize, bool)> {
        let n = self.spec.truncation as i32;
        if mode.len() != self.space_dim || pol >= self.pols {
            return Err(Error::InvalidModel(format!(
                "mode {mode:?} / polarization {pol} does not fit a {}-dimensional model",
                self.space_dim
            )));
        }
        if mode.iter().any(|c| c.abs() > n) || mode.iter().all(|&c| c == 0) {
            return Err(Error::InvalidModel(format!(
                "mode {mode:?} is outside the truncation 0 < |κ|∞ <= {n}"
            )));
        }
        let side = (2 * n + 1) as usize;
        let idx = mode.iter().fold(0usize, |acc, c| acc * side + (c + n) as usize);
        let l = self.lookup[idx];
        let m = (l.unsigned_abs() - 1) as usize;
        Ok((2 * (m * self.pols + pol), l < 0))
    }

    /// Adds `(re, im)` to mode `κ`, polarization `pol`, honouring the
    /// conjugate symmetry when `κ` is not in the stored half set.
    pub fn add_mode(&self, coords: &mut [f64], mode: &[i32], pol: usize, re: f64, im: f64) -> Result<()> {
        let (i, conj) = self.coord_index(mode, pol)?;
        coords[i] += re;
        coords[i + 1] += if conj { -im } else { im };
        Ok(())
    }

    /// A state with a single excited mode.
    pub fn single_mode(&self, mode: &[i32], pol: usize, re: f64, im: f64) -> Result<State> {
        let mut c = vec![0.0; self.dim()];
        self.add_mode(&mut c, mode, pol, re, im)?;
        Ok(State {
            model: self.spec.id(),
            coords: c,
        })
    }

    /// Enstrophy `‖u‖² = (Au, u)`.
    pub fn enstrophy(&self, u: &[f64]) -> f64 {
        let per_mode = 2 * self.pols;
        u.chunks_exact(per_mode)
            .zip(&self.stokes)
            .map(|(c, lam)| lam * c.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    fn amplitudes(&self, u: &[f64]) -> Vec<Complex64> {
        u.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
    }

    /// `B(u, v)` in coordinates.
    pub fn bilinear_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let ua = self.amplitudes(u);
        let va = self.amplitudes(v);
        let pols = self.pols;
        let mut acc = vec![Complex64::new(0.0, 0.0); ua.len()];
        for t in &self.triads {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..pols {
                let a = ua[t.p as usize * pols + i];
                let a = if t.p_conj { a.conj() } else { a };
                s += a * t.cp[i];
            }
            for j in 0..pols {
                let mut r = Complex64::new(0.0, 0.0);
                for l in 0..pols {
                    let b = va[t.q as usize * pols + l];
                    let b = if t.q_conj { b.conj() } else { b };
                    r += b * t.cq[l][j];
                }
                acc[t.out as usize * pols + j] += s * r;
            }
        }
        // (û_p · i k_q) v̂_q, rescaled to coordinates: multiply by iσ.
        for (o, a) in out.chunks_exact_mut(2).zip(&acc) {
            let z = Complex64::new(0.0, self.sigma) * a;
            o[0] = z.re;
            o[1] = z.im;
        }
    }

    /// `N(u) = g - B(u, u)`.
    pub fn nonlinear_into(&self, u: &[f64], out: &mut [f64]) {
        self.bilinear_into(u, u, out);
        for (o, g) in out.iter_mut().zip(&self.forcing.coords) {
            *o = g - *o;
        }
    }
}
