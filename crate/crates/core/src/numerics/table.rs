//! Piecewise representation of ρ_θ, p_θ and F_θ on [0, x_max].
//!
//! On (0, 1] everything is closed form. Each unit interval [n, n+1] beyond
//! that is split into the same panel layout in the local coordinate
//! u = x − n: geometrically graded towards u = 0 (where ρ_n inherits a
//! (x − n)^{θ+n−1} branch point) and optionally subdivided uniformly.
//! Every panel carries Chebyshev–Lobatto node values of ρ and F, which
//! are interpolated barycentrically.
//!
//! Two independent constructions fill the node values:
//!
//! * [`build_tables`] solves x ρ(x) = θ ∫_{x−1}^{x} ρ(t) dt panel by panel
//!   (collocation). All terms are positive, so ρ keeps its relative
//!   accuracy far into the tail.
//! * [`cdf_via_recursion`] integrates (x^{−θ} F)' = −θ x^{−θ−1} F(x − 1)
//!   explicitly with Gauss–Legendre panels, starting from F = c_θ x^θ / θ
//!   on [0, 1].

use serde::{Deserialize, Serialize};

use super::DickmanParams;
use crate::error::{Error, Result};
use crate::quadrature::{solve_dense, LobattoPanel};
use crate::scalar::Scalar;
use crate::special::dickman_normalizer;

/// Nodes per panel.
const PANEL_NODES: usize = 16;
/// Uniform subdivisions are doubled from 1 up to 2^MAX_REFINEMENTS.
const MAX_REFINEMENTS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    DelayIntegral,
    CdfRecursion,
}

#[derive(Debug, Clone)]
struct UnitPiece<T> {
    /// Node values, `panels × PANEL_NODES`, row per panel.
    rho: Vec<T>,
    cdf: Vec<T>,
    /// ∫ ρ over each panel.
    panel_mass: Vec<T>,
}

/// Numerical ρ_θ / p_θ / F_θ on [0, x_max]. Immutable once built.
#[derive(Debug, Clone)]
pub struct DensityTable<T> {
    theta: T,
    x_max: T,
    c_theta: T,
    grid_tol: T,
    achieved: T,
    construction: Construction,
    panel: LobattoPanel<T>,
    breaks: Vec<T>,
    pieces: Vec<UnitPiece<T>>,
}

/// Default tolerance for a scalar type: 1e-10, or a few ulps above that
/// for `f32`.
pub fn default_tol<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(8.0))
}

fn check_inputs<T: Scalar>(x_max: T, tol: T) -> Result<()> {
    if !x_max.is_finite() || x_max < T::lit(2.0) {
        return Err(Error::domain(format!("x_max must be finite and at least 2, got {x_max}")));
    }
    if !(tol > T::zero() && tol <= T::lit(1e-6)) {
        return Err(Error::domain(format!("tol must lie in (0, 1e-6], got {tol}")));
    }
    Ok(())
}

/// Builds the table by collocation of the positive integral form of the
/// delay equation.
pub fn build_tables<T: Scalar>(params: &DickmanParams<T>, x_max: T, tol: T) -> Result<DensityTable<T>> {
    check_inputs(x_max, tol)?;
    refine(params, x_max, tol, Construction::DelayIntegral)
}

/// Second, independent construction via the first-order relation
/// F'(x) = (θ/x)(F(x) − F(x − 1)).
pub fn cdf_via_recursion<T: Scalar>(params: &DickmanParams<T>, x_max: T, tol: T) -> Result<DensityTable<T>> {
    check_inputs(x_max, tol)?;
    refine(params, x_max, tol, Construction::CdfRecursion)
}

fn refine<T: Scalar>(params: &DickmanParams<T>, x_max: T, tol: T, how: Construction) -> Result<DensityTable<T>> {
    let panel = LobattoPanel::new(PANEL_NODES);
    let mut coarse = assemble(params, x_max, tol, how, &panel, 1);
    let mut achieved = T::infinity();
    for level in 1..=MAX_REFINEMENTS {
        let mut fine = assemble(params, x_max, tol, how, &panel, 1 << level);
        achieved = coarse.refinement_gap(&fine);
        fine.achieved = achieved;
        if achieved <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Accuracy { achieved: achieved.as_f64(), target: tol.as_f64() })
}

fn panel_breaks<T: Scalar>(theta: T, subdivisions: usize) -> Vec<T> {
    // [0, 2^-L], [2^-L, 2^-(L-1)], ..., [1/2, 1]; the first panel is thin
    // enough that u^θ varies below double precision across it.
    let levels = (57.0 / theta.as_f64().min(1.0)).ceil().min(4000.0) as i32;
    let mut geometric = vec![T::zero()];
    for j in (0..=levels).rev() {
        geometric.push(T::lit(0.5).powi(j));
    }
    let mut breaks = Vec::with_capacity((geometric.len() - 1) * subdivisions + 1);
    breaks.push(T::zero());
    for w in geometric.windows(2) {
        let step = (w[1] - w[0]) / T::from_u64_lossy(subdivisions as u64);
        for s in 1..=subdivisions {
            breaks.push(if s == subdivisions { w[1] } else { w[0] + step * T::from_u64_lossy(s as u64) });
        }
    }
    breaks
}

fn assemble<T: Scalar>(
    params: &DickmanParams<T>,
    x_max: T,
    tol: T,
    how: Construction,
    panel: &LobattoPanel<T>,
    subdivisions: usize,
) -> DensityTable<T> {
    let theta = params.theta();
    let c_theta = dickman_normalizer(theta);
    let breaks = panel_breaks(theta, subdivisions);
    let n_pieces = x_max.ceil().to_usize().unwrap_or(2).max(2) - 1;
    let mut pieces: Vec<UnitPiece<T>> = Vec::with_capacity(n_pieces);
    let mut cdf_start = c_theta / theta;
    for n in 1..=n_pieces {
        let prev = pieces.last();
        let piece = match how {
            Construction::DelayIntegral => delay_piece(theta, c_theta, n, cdf_start, prev, &breaks, panel),
            Construction::CdfRecursion => recursion_piece(theta, c_theta, n, cdf_start, prev, &breaks, panel),
        };
        cdf_start = match how {
            Construction::DelayIntegral => {
                cdf_start + c_theta * piece.panel_mass.iter().fold(T::zero(), |a, &m| a + m)
            }
            Construction::CdfRecursion => piece.cdf[piece.cdf.len() - 1],
        };
        pieces.push(piece);
    }
    DensityTable {
        theta,
        x_max,
        c_theta,
        grid_tol: tol,
        achieved: T::zero(),
        construction: how,
        panel: panel.clone(),
        breaks,
        pieces,
    }
}

/// (n+u) ρ_n(u) = θ [ ∫_u^1 ρ_{n−1} + ∫_0^u ρ_n ].
fn delay_piece<T: Scalar>(
    theta: T,
    c_theta: T,
    n: usize,
    cdf_start: T,
    prev: Option<&UnitPiece<T>>,
    breaks: &[T],
    panel: &LobattoPanel<T>,
) -> UnitPiece<T> {
    let m = panel.len();
    let n_panels = breaks.len() - 1;
    let nf = T::from_u64_lossy(n as u64);
    // mass of ρ_{n−1} strictly to the right of each panel
    let mut right_mass = vec![T::zero(); n_panels];
    if let Some(p) = prev {
        let mut acc = T::zero();
        for k in (0..n_panels).rev() {
            right_mass[k] = acc;
            acc = acc + p.panel_mass[k];
        }
    }
    let mut rho = vec![T::zero(); n_panels * m];
    let mut cdf = vec![T::zero(); n_panels * m];
    let mut panel_mass = vec![T::zero(); n_panels];
    let mut left_mass = T::zero();
    let mut a = vec![T::zero(); m * m];
    let mut b = vec![T::zero(); m];
    for k in 0..n_panels {
        let (lo, hi) = (breaks[k], breaks[k + 1]);
        let half = (hi - lo) / T::lit(2.0);
        let nodes: Vec<T> = panel.nodes_on(lo, hi).collect();
        for i in 0..m {
            let tail = match prev {
                None => (T::one() - nodes[i].powf(theta)) / theta,
                Some(p) => {
                    let prev_vals = &p.rho[k * m..(k + 1) * m];
                    let mut t = right_mass[k];
                    for j in 0..m {
                        let w = panel.cumulative(m - 1, j, half) - panel.cumulative(i, j, half);
                        t = t + w * prev_vals[j];
                    }
                    t
                }
            };
            for j in 0..m {
                a[i * m + j] = -theta * panel.cumulative(i, j, half);
            }
            a[i * m + i] = a[i * m + i] + nf + nodes[i];
            b[i] = theta * (tail + left_mass);
        }
        let solved = solve_dense(&mut a, &mut b, m);
        debug_assert!(solved, "collocation system is nonsingular");
        let vals = &b;
        let mut total = T::zero();
        for i in 0..m {
            let mut cum = T::zero();
            for j in 0..m {
                cum = cum + panel.cumulative(i, j, half) * vals[j];
            }
            cdf[k * m + i] = cdf_start + c_theta * (left_mass + cum);
            if i == m - 1 {
                total = cum;
            }
        }
        rho[k * m..(k + 1) * m].copy_from_slice(vals);
        panel_mass[k] = total;
        left_mass = left_mass + total;
    }
    UnitPiece { rho, cdf, panel_mass }
}

/// (x^{−θ} F)' = −θ x^{−θ−1} F(x−1), integrated from the left end of each
/// panel to each node.
fn recursion_piece<T: Scalar>(
    theta: T,
    c_theta: T,
    n: usize,
    cdf_start: T,
    prev: Option<&UnitPiece<T>>,
    breaks: &[T],
    panel: &LobattoPanel<T>,
) -> UnitPiece<T> {
    let m = panel.len();
    let n_panels = breaks.len() - 1;
    let nf = T::from_u64_lossy(n as u64);
    let gauss = panel.gauss();
    let mut rho = vec![T::zero(); n_panels * m];
    let mut cdf = vec![T::zero(); n_panels * m];
    let mut panel_mass = vec![T::zero(); n_panels];
    let mut g_left = nf.powf(-theta) * cdf_start;
    for k in 0..n_panels {
        let (lo, hi) = (breaks[k], breaks[k + 1]);
        let nodes: Vec<T> = panel.nodes_on(lo, hi).collect();
        let prev_cdf = |s: T| -> T {
            match prev {
                None => c_theta * s.powf(theta) / theta,
                Some(p) => panel.interpolate(&p.cdf[k * m..(k + 1) * m], lo, hi, s),
            }
        };
        for i in 0..m {
            let integral = gauss.integrate(lo, nodes[i], |s| (nf + s).powf(-theta - T::one()) * prev_cdf(s));
            let g = g_left - theta * integral;
            let x = nf + nodes[i];
            let f = x.powf(theta) * g;
            let f_prev = match prev {
                None => c_theta * nodes[i].powf(theta) / theta,
                Some(p) => p.cdf[k * m + i],
            };
            cdf[k * m + i] = f;
            rho[k * m + i] = theta * (f - f_prev) / (c_theta * x);
        }
        g_left = (nf + hi).powf(-theta) * cdf[k * m + m - 1];
        let f_lo = if k == 0 { cdf_start } else { cdf[(k - 1) * m + m - 1] };
        panel_mass[k] = (cdf[k * m + m - 1] - f_lo) / c_theta;
    }
    UnitPiece { rho, cdf, panel_mass }
}

impl<T: Scalar> DensityTable<T> {
    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    /// e^{−θγ}/Γ(θ).
    pub fn c_theta(&self) -> T {
        self.c_theta
    }

    pub fn grid_tol(&self) -> T {
        self.grid_tol
    }

    /// Refinement gap observed when the table was accepted.
    pub fn achieved_error(&self) -> T {
        self.achieved
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    fn locate(&self, x: T) -> (usize, usize, T, T, T) {
        let n = x.floor().to_usize().unwrap_or(1).max(1);
        let (piece, u) = if n - 1 >= self.pieces.len() {
            (self.pieces.len() - 1, T::one())
        } else {
            (n - 1, x - T::from_u64_lossy(n as u64))
        };
        let k = self.breaks.partition_point(|&b| b <= u).saturating_sub(1).min(self.breaks.len() - 2);
        (piece, k, u, self.breaks[k], self.breaks[k + 1])
    }

    /// ρ_θ(x). Zero for x ≤ 0 and beyond x_max.
    pub fn rho(&self, x: T) -> T {
        if x <= T::zero() || x > self.x_max {
            return T::zero();
        }
        if x <= T::one() {
            return x.powf(self.theta - T::one());
        }
        let (piece, k, u, lo, hi) = self.locate(x);
        let m = self.panel.len();
        self.panel.interpolate(&self.pieces[piece].rho[k * m..(k + 1) * m], lo, hi, u)
    }

    /// p_θ(x) = c_θ ρ_θ(x).
    pub fn density(&self, x: T) -> T {
        self.c_theta * self.rho(x)
    }

    /// F_θ(x); 1 beyond x_max.
    pub fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        if x <= T::one() {
            return self.c_theta * x.powf(self.theta) / self.theta;
        }
        if x > self.x_max {
            return T::one();
        }
        let (piece, k, u, lo, hi) = self.locate(x);
        let m = self.panel.len();
        self.panel.interpolate(&self.pieces[piece].cdf[k * m..(k + 1) * m], lo, hi, u)
    }

    /// ∫_0^x ρ_θ.
    pub fn rho_integral(&self, x: T) -> T {
        self.cdf(x) / self.c_theta
    }

    /// Total tabulated probability F_θ(x_max).
    pub fn mass(&self) -> T {
        self.cdf(self.x_max)
    }

    /// ∫_0^{x_max} x p_θ(x) dx.
    pub fn first_moment(&self) -> T {
        let theta = self.theta;
        let mut acc = self.c_theta / (theta + T::one());
        let m = self.panel.len();
        for (idx, piece) in self.pieces.iter().enumerate() {
            let n = T::from_u64_lossy(idx as u64 + 1);
            for k in 0..self.breaks.len() - 1 {
                let (lo, hi) = (self.breaks[k], self.breaks[k + 1]);
                if n + lo >= self.x_max {
                    break;
                }
                let upper = hi.min(self.x_max - n);
                let vals = &piece.rho[k * m..(k + 1) * m];
                let part = self
                    .panel
                    .gauss()
                    .integrate(lo, upper, |u| (n + u) * self.panel.interpolate(vals, lo, hi, u));
                acc = acc + self.c_theta * part;
            }
        }
        acc
    }

    /// Inverse CDF by bisection on [0, x_max].
    pub fn quantile(&self, p: T) -> T {
        if p <= T::zero() {
            return T::zero();
        }
        if p >= self.mass() {
            return self.x_max;
        }
        let f1 = self.cdf(T::one());
        if p <= f1 {
            return (p * self.theta / self.c_theta).powf(T::one() / self.theta);
        }
        let (mut lo, mut hi) = (T::one(), self.x_max);
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        (lo + hi) / T::lit(2.0)
    }

    /// Points at which two tables are compared: every panel node and panel
    /// midpoint on [0, x_max].
    pub fn probe_points(&self) -> Vec<T> {
        let mut pts = Vec::new();
        let steps = 64;
        for i in 1..=steps {
            pts.push(T::from_u64_lossy(i) / T::from_u64_lossy(steps));
        }
        for idx in 0..self.pieces.len() {
            let n = T::from_u64_lossy(idx as u64 + 1);
            for k in 0..self.breaks.len() - 1 {
                let (lo, hi) = (self.breaks[k], self.breaks[k + 1]);
                for u in self.panel.nodes_on(lo, hi).chain(std::iter::once((lo + hi) / T::lit(2.0))) {
                    let x = n + u;
                    if x <= self.x_max {
                        pts.push(x);
                    }
                }
            }
        }
        pts
    }

    /// sup |F_self − F_other| over both tables' probe points.
    pub fn cdf_sup_distance(&self, other: &DensityTable<T>) -> T {
        let x_max = self.x_max.min(other.x_max);
        self.probe_points()
            .into_iter()
            .chain(other.probe_points())
            .filter(|&x| x <= x_max)
            .fold(T::zero(), |acc, x| acc.max((self.cdf(x) - other.cdf(x)).abs()))
    }

    fn refinement_gap(&self, finer: &DensityTable<T>) -> T {
        let mut gap = T::zero();
        let last = self.x_max;
        let mut knots: Vec<T> = (2..=self.pieces.len() + 1).map(|n| T::from_u64_lossy(n as u64)).collect();
        knots.push(last);
        knots.push(T::lit(1.5));
        for x in knots.into_iter().filter(|&x| x <= last) {
            let f_gap = (self.cdf(x) - finer.cdf(x)).abs();
            gap = gap.max(f_gap);
            if self.construction == Construction::DelayIntegral {
                let r = finer.rho(x);
                if r > T::zero() {
                    gap = gap.max((self.rho(x) - r).abs() / r);
                }
            }
        }
        gap
    }
}
