//! Quadrature and interpolation primitives.
//!
//! Nodes and weights are computed in `f64` once and cast to the working
//! scalar type.

use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre_f64(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..(m + 1) / 2 {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(m: usize) -> Self {
        let (n, w) = gauss_legendre_f64(m);
        Self {
            nodes: n.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        }
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + half * x);
        }
        acc * half
    }
}

const GK_XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK_WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(GK_WGK[7]);
    let mut gauss = fc * T::lit(GK_WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(GK_XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + s * T::lit(GK_WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(GK_WG[j / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature with interval bisection.
///
/// Returns the integral estimate and the summed error estimate.
pub fn integrate_adaptive<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> (T, T) {
    const MAX_INTERVALS: usize = 500;
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err = parts.iter().fold(T::zero(), |acc, p| acc + p.3);
        let total = parts.iter().fold(T::zero(), |acc, p| acc + p.2);
        if total_err <= tol * total.abs().max(T::one()) || parts.len() >= MAX_INTERVALS {
            return (total, total_err);
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = (lo + hi) / T::lit(2.0);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Chebyshev–Lobatto reference panel on [-1, 1] with barycentric
/// interpolation and a cumulative integration matrix.
#[derive(Debug, Clone)]
pub struct LobattoPanel<T> {
    nodes: Vec<T>,
    bary: Vec<T>,
    /// `cumulative[i * m + j]` = ∫_{-1}^{x_i} ℓ_j(s) ds
    cumulative: Vec<T>,
    gauss: GaussLegendre<T>,
}

impl<T: Scalar> LobattoPanel<T> {
    pub fn new(m: usize) -> Self {
        assert!(m >= 3, "panel needs at least three nodes");
        let nodes_f: Vec<f64> = (0..m)
            .map(|j| -(std::f64::consts::PI * j as f64 / (m - 1) as f64).cos())
            .collect();
        let bary_f: Vec<f64> = (0..m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let (gx, gw) = gauss_legendre_f64(m);
        let mut cumulative = vec![T::zero(); m * m];
        for i in 0..m {
            let upper = nodes_f[i];
            let half = (upper + 1.0) / 2.0;
            let mid = (upper - 1.0) / 2.0;
            for j in 0..m {
                let mut acc = 0.0;
                for (&t, &w) in gx.iter().zip(&gw) {
                    acc += w * lagrange_basis(&nodes_f, &bary_f, j, mid + half * t);
                }
                cumulative[i * m + j] = T::lit(acc * half);
            }
        }
        Self {
            nodes: nodes_f.into_iter().map(T::lit).collect(),
            bary: bary_f.into_iter().map(T::lit).collect(),
            cumulative,
            gauss: GaussLegendre::new(m),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node positions mapped onto [lo, hi].
    pub fn nodes_on(&self, lo: T, hi: T) -> impl Iterator<Item = T> + '_ {
        let half = (hi - lo) / T::lit(2.0);
        let mid = (hi + lo) / T::lit(2.0);
        self.nodes.iter().map(move |&x| mid + half * x)
    }

    /// Entry (i, j) of the cumulative integration matrix scaled to a panel of
    /// half-width `half`.
    #[inline]
    pub fn cumulative(&self, i: usize, j: usize, half: T) -> T {
        self.cumulative[i * self.len() + j] * half
    }

    /// Barycentric interpolation of node `values` on [lo, hi] at `x`.
    pub fn interpolate(&self, values: &[T], lo: T, hi: T, x: T) -> T {
        let t = (T::lit(2.0) * x - lo - hi) / (hi - lo);
        let mut num = T::zero();
        let mut den = T::zero();
        for ((&xj, &wj), &vj) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = t - xj;
            if d == T::zero() {
                return vj;
            }
            let c = wj / d;
            num = num + c * vj;
            den = den + c;
        }
        num / den
    }

    /// ∫_lo^x of the interpolant, by Gauss–Legendre on [lo, x].
    pub fn integrate_to(&self, values: &[T], lo: T, hi: T, x: T) -> T {
        self.gauss.integrate(lo, x, |s| self.interpolate(values, lo, hi, s))
    }

    pub fn gauss(&self) -> &GaussLegendre<T> {
        &self.gauss
    }
}

fn lagrange_basis(nodes: &[f64], bary: &[f64], j: usize, x: f64) -> f64 {
    let mut den = 0.0;
    for (k, (&xk, &wk)) in nodes.iter().zip(bary).enumerate() {
        let d = x - xk;
        if d == 0.0 {
            return if k == j { 1.0 } else { 0.0 };
        }
        den += wk / d;
    }
    (bary[j] / (x - nodes[j])) / den
}

/// Solves the dense system `a · x = b` in place (partial pivoting).
/// `a` is row-major `m × m`; the solution overwrites `b`.
pub(crate) fn solve_dense<T: Scalar>(a: &mut [T], b: &mut [T], m: usize) -> bool {
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r * m + col].abs() > a[piv * m + col].abs() {
                piv = r;
            }
        }
        if a[piv * m + col] == T::zero() {
            return false;
        }
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col] / d;
            if f == T::zero() {
                continue;
            }
            for c in col..m {
                a[r * m + c] = a[r * m + c] - f * a[col * m + c];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    for r in (0..m).rev() {
        let mut s = b[r];
        for c in r + 1..m {
            s = s - a[r * m + c] * b[c];
        }
        b[r] = s / a[r * m + r];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::<f64>::new(8);
        // degree 15 is exact for 8 nodes
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert_relative_eq!(v, 2f64.powi(16) / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_handles_removable_singularity() {
        // ∫_0^1 (e^{-x} - 1)/x dx = -Σ (-1)^{n+1}/(n n!)
        let (v, _) = integrate_adaptive(|x: f64| (-x).exp_m1() / x, 0.0, 1.0, 1e-14);
        let series: f64 = (1..30)
            .map(|n| {
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                (if n % 2 == 1 { 1.0 } else { -1.0 }) / (n as f64 * fact)
            })
            .sum();
        assert_relative_eq!(v, -series, max_relative = 1e-13);
    }

    #[test]
    fn lobatto_interpolates_and_integrates() {
        let p = LobattoPanel::<f64>::new(12);
        let (lo, hi) = (0.25, 0.75);
        let vals: Vec<f64> = p.nodes_on(lo, hi).map(|x| x.exp()).collect();
        assert_relative_eq!(p.interpolate(&vals, lo, hi, 0.4), 0.4f64.exp(), max_relative = 1e-12);
        let half = (hi - lo) / 2.0;
        let last = p.len() - 1;
        let total: f64 = (0..p.len()).map(|j| p.cumulative(last, j, half) * vals[j]).sum();
        assert_relative_eq!(total, hi.exp() - lo.exp(), max_relative = 1e-12);
        assert_relative_eq!(p.integrate_to(&vals, lo, hi, 0.5), 0.5f64.exp() - lo.exp(), max_relative = 1e-12);
    }

    #[test]
    fn dense_solver() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        assert!(solve_dense(&mut a, &mut b, 2));
        assert_relative_eq!(b[0], 0.8, max_relative = 1e-14);
        assert_relative_eq!(b[1], 1.4, max_relative = 1e-14);
    }
}
