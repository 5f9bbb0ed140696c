//! Cubic right-hand sides.
//!
//! All variants are evaluated pointwise. The Hermitian product
//! `<a, b> = a_1 conj(b_1) + a_2 conj(b_2)` is conjugate-linear in its second
//! argument; flipping that convention conjugates the general cubic term.

use crate::chart::{Domain, GridChart};
use crate::error::{Result, SpinflowError};
use crate::spinor::{hermitian, SpinorField, C64, I, ZERO};

/// Coefficients of a chiral nonlinearity `[U Gamma_+ + V Gamma_-] psi` with
///
/// ```text
/// U = u_h H |psi|^2 + u_1 |psi_1|^2 + u_2 |psi_2|^2
/// V = v_h H |psi|^2 + v_1 |psi_1|^2 + v_2 |psi_2|^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvCoefficients {
    pub u: [C64; 3],
    pub v: [C64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiralPreset {
    /// `U = conj(V) = -(H - i)|psi|^2`.
    Su2,
    /// `U = V = -H|psi|^2 - (i/2)(|psi_1|^2 - |psi_2|^2)`.
    Nil,
    /// `U = -H|psi|^2 - i((3/2)|psi_2|^2 - |psi_1|^2)`,
    /// `V = -H|psi|^2 - i(|psi_2|^2 - (3/2)|psi_1|^2)`.
    Sl2,
}

impl ChiralPreset {
    pub fn coefficients(self) -> UvCoefficients {
        let m1 = C64::new(-1.0, 0.0);
        match self {
            ChiralPreset::Su2 => UvCoefficients { u: [m1, I, I], v: [m1, -I, -I] },
            ChiralPreset::Nil => UvCoefficients { u: [m1, -I * 0.5, I * 0.5], v: [m1, -I * 0.5, I * 0.5] },
            ChiralPreset::Sl2 => UvCoefficients { u: [m1, I, -I * 1.5], v: [m1, I * 1.5, -I] },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChiralPreset::Su2 => "su2",
            ChiralPreset::Nil => "nil",
            ChiralPreset::Sl2 => "sl2",
        }
    }
}

/// A real rank-4 tensor `T^i_{jkl}`, stored with `l` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        t.data[((i * n + j) * n + k) * n + l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// `R_{ijkl} = kappa (delta_ik delta_jl - delta_il delta_jk)`, the
    /// curvature tensor of a space form.
    pub fn constant_curvature(n: usize, kappa: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self::from_fn(n, |i, j, k, l| kappa * (d(i, k) * d(j, l) - d(i, l) * d(j, k)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of `R_ijkl = -R_jikl = -R_ijlk = R_klij`.
    pub fn curvature_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        d = d.max((r + self.get(j, i, k, l)).abs());
                        d = d.max((r + self.get(i, j, l, k)).abs());
                        d = d.max((r - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        d
    }
}

/// The nonlinearity `F(psi)` in `D psi = F(psi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reaction {
    /// `H^i_{jkl} <psi^j, psi^k> psi^l`, with one tensor per node or a single
    /// constant tensor.
    GeneralCubic { tensors: Vec<Tensor4> },
    /// `H |psi|^2 psi`, `n = 1`.
    ScalarH { h: Vec<f64> },
    /// `-(1/3) R^i_{jkl} <psi^j, psi^k> psi^l` with a constant tensor.
    CurvatureCubic { r: Tensor4 },
    /// `[U Gamma_+ + V Gamma_-] psi`, `n = 1`.
    ChiralUv { coeffs: UvCoefficients, h: Vec<f64> },
}

/// A nonlinearity together with its component count and the bounds
/// `h0 = sup |H|`, `h1 = sup |grad H|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSpec {
    reaction: Reaction,
    n: usize,
    h0: f64,
    h1: f64,
}

/// Scalar coefficient field: a single constant or one value per node.
fn expand(values: Vec<f64>, chart: &GridChart) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; chart.len()]),
        len if len == chart.len() => Ok(values),
        len => Err(SpinflowError::Configuration(format!(
            "coefficient field has {len} values, chart has {} nodes",
            chart.len()
        ))),
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SpinflowError::Configuration("non-finite coefficient".into()))
    }
}

/// `max |grad g|` by centered differences, periodic on the torus and
/// one-sided at chart edges otherwise.
fn gradient_sup(chart: &GridChart, g: impl Fn(usize) -> f64) -> f64 {
    let (nx, ny) = (chart.nx(), chart.ny());
    let (hx, hy) = chart.spacing_xy();
    let periodic = matches!(chart.domain(), Domain::Torus { .. });
    let val = |i: isize, j: isize| -> Option<f64> {
        let (i, j) = if periodic {
            (i.rem_euclid(nx as isize), j.rem_euclid(ny as isize))
        } else if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            return None;
        } else {
            (i, j)
        };
        let node = chart.index(i as usize, j as usize);
        chart.is_active(node).then(|| g(node))
    };
    let diff = |i: isize, j: isize, di: isize, dj: isize, h: f64| -> f64 {
        let c = val(i, j).unwrap_or(0.0);
        match (val(i + di, j + dj), val(i - di, j - dj)) {
            (Some(p), Some(m)) => (p - m) / (2.0 * h),
            (Some(p), None) => (p - c) / h,
            (None, Some(m)) => (c - m) / h,
            (None, None) => 0.0,
        }
    };
    let mut best: f64 = 0.0;
    for node in chart.active_nodes() {
        let (i, j) = chart.ij(node);
        let (i, j) = (i as isize, j as isize);
        best = best.max(diff(i, j, 1, 0, hx).hypot(diff(i, j, 0, 1, hy)));
    }
    best
}

impl ReactionSpec {
    /// `H |psi|^2 psi`; `h` holds one value (constant) or one per node.
    pub fn scalar_h(chart: &GridChart, h: Vec<f64>) -> Result<Self> {
        check_finite(&h)?;
        let h = expand(h, chart)?;
        let h0 = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h1 = gradient_sup(chart, |k| h[k]);
        Ok(Self { reaction: Reaction::ScalarH { h }, n: 1, h0, h1 })
    }

    /// General cubic with a single tensor everywhere or one per node.
    pub fn general_cubic(chart: &GridChart, tensors: Vec<Tensor4>) -> Result<Self> {
        let Some(first) = tensors.first() else {
            return Err(SpinflowError::Configuration("general cubic needs at least one tensor".into()));
        };
        let n = first.n();
        if n == 0 || tensors.iter().any(|t| t.n() != n) {
            return Err(SpinflowError::Configuration("tensors disagree on the component count".into()));
        }
        if tensors.len() != 1 && tensors.len() != chart.len() {
            return Err(SpinflowError::Configuration(format!(
                "{} tensors for a chart of {} nodes",
                tensors.len(),
                chart.len()
            )));
        }
        for t in &tensors {
            check_finite(&t.data)?;
        }
        let h0 = tensors.iter().fold(0.0f64, |m, t| m.max(t.max_abs()));
        let h1 = if tensors.len() == 1 {
            0.0
        } else {
            let len = n.pow(4);
            (0..len).fold(0.0f64, |m, e| m.max(gradient_sup(chart, |k| tensors[k].data[e])))
        };
        Ok(Self { reaction: Reaction::GeneralCubic { tensors }, n, h0, h1 })
    }

    /// `-(1/3) R^i_{jkl} <psi^j, psi^k> psi^l`. The tensor must have the
    /// symmetries of a curvature tensor.
    pub fn curvature_cubic(r: Tensor4) -> Result<Self> {
        check_finite(&r.data)?;
        let defect = r.curvature_symmetry_defect();
        if defect > 1e-12 {
            return Err(SpinflowError::Configuration(format!(
                "tensor violates curvature symmetries by {defect:.3e}"
            )));
        }
        let n = r.n();
        let h0 = r.max_abs() / 3.0;
        Ok(Self { reaction: Reaction::CurvatureCubic { r }, n, h0, h1: 0.0 })
    }

    /// `[U Gamma_+ + V Gamma_-] psi` with `H` one value or one per node.
    pub fn chiral_uv(chart: &GridChart, coeffs: UvCoefficients, h: Vec<f64>) -> Result<Self> {
        check_finite(&h)?;
        if coeffs.u.iter().chain(&coeffs.v).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SpinflowError::Configuration("non-finite U/V coefficient".into()));
        }
        let h = expand(h, chart)?;
        let side = |c: &[C64; 3]| {
            let hmax = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            c[0].norm() * hmax + c[1].norm().max(c[2].norm())
        };
        let h0 = side(&coeffs.u).max(side(&coeffs.v));
        let grad = gradient_sup(chart, |k| h[k]);
        let h1 = grad * coeffs.u[0].norm().max(coeffs.v[0].norm());
        Ok(Self { reaction: Reaction::ChiralUv { coeffs, h }, n: 1, h0, h1 })
    }

    pub fn chiral_preset(chart: &GridChart, preset: ChiralPreset, h: Vec<f64>) -> Result<Self> {
        Self::chiral_uv(chart, preset.coefficients(), h)
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `sup |H^i_{jkl}|`. For the chiral form this bounds the cubic
    /// coefficient: `|u_h| sup|H| + max(|u_1|, |u_2|)`, likewise for `V`.
    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    /// The same nonlinearity written as a general cubic, when it has one.
    /// Scalar `H` becomes `H^1_{111}`; the curvature form becomes `-R/3`.
    pub fn to_general_cubic(&self, chart: &GridChart) -> Option<Self> {
        match &self.reaction {
            Reaction::GeneralCubic { .. } => Some(self.clone()),
            Reaction::ScalarH { h } => {
                let tensors = h.iter().map(|&v| Tensor4::from_fn(1, |_, _, _, _| v)).collect();
                Self::general_cubic(chart, tensors).ok()
            }
            Reaction::CurvatureCubic { r } => Self::general_cubic(chart, vec![r.scaled(-1.0 / 3.0)]).ok(),
            Reaction::ChiralUv { .. } => None,
        }
    }

    fn check(&self, psi: &SpinorField) -> Result<()> {
        if psi.n() != self.n {
            return Err(SpinflowError::Configuration(format!(
                "reaction expects n = {}, field has n = {}",
                self.n,
                psi.n()
            )));
        }
        let len = psi.chart().len();
        let bad = match &self.reaction {
            Reaction::GeneralCubic { tensors } => tensors.len() != 1 && tensors.len() != len,
            Reaction::ScalarH { h } | Reaction::ChiralUv { h, .. } => h.len() != len,
            Reaction::CurvatureCubic { .. } => false,
        };
        if bad {
            return Err(SpinflowError::Configuration("reaction coefficients do not match the chart".into()));
        }
        Ok(())
    }

    /// Evaluate at one node. `v` holds the `2n` values of the node.
    fn eval_node(&self, node: usize, v: &[C64], out: &mut [C64]) {
        match &self.reaction {
            Reaction::GeneralCubic { tensors } => {
                let t = if tensors.len() == 1 { &tensors[0] } else { &tensors[node] };
                cubic(t, 1.0, v, out);
            }
            Reaction::CurvatureCubic { r } => cubic(r, -1.0 / 3.0, v, out),
            Reaction::ScalarH { h } => {
                let m = h[node] * (v[0].norm_sqr() + v[1].norm_sqr());
                out[0] = v[0] * m;
                out[1] = v[1] * m;
            }
            Reaction::ChiralUv { coeffs, h } => {
                let (p1, p2) = (v[0].norm_sqr(), v[1].norm_sqr());
                let hh = h[node] * (p1 + p2);
                let u = coeffs.u[0] * hh + coeffs.u[1] * p1 + coeffs.u[2] * p2;
                let w = coeffs.v[0] * hh + coeffs.v[1] * p1 + coeffs.v[2] * p2;
                // Gamma_+ keeps the second entry, Gamma_- the first
                out[0] = w * v[0];
                out[1] = u * v[1];
            }
        }
    }

    /// Directional derivative at one node in direction `d`. The map is only
    /// real-linear in `d`.
    fn derivative_node(&self, node: usize, v: &[C64], d: &[C64], out: &mut [C64]) {
        match &self.reaction {
            Reaction::GeneralCubic { tensors } => {
                let t = if tensors.len() == 1 { &tensors[0] } else { &tensors[node] };
                cubic_derivative(t, 1.0, v, d, out);
            }
            Reaction::CurvatureCubic { r } => cubic_derivative(r, -1.0 / 3.0, v, d, out),
            Reaction::ScalarH { h } => {
                let m = h[node] * (v[0].norm_sqr() + v[1].norm_sqr());
                let dm = h[node] * 2.0 * (v[0] * d[0].conj() + v[1] * d[1].conj()).re;
                out[0] = d[0] * m + v[0] * dm;
                out[1] = d[1] * m + v[1] * dm;
            }
            Reaction::ChiralUv { coeffs, h } => {
                let (p1, p2) = (v[0].norm_sqr(), v[1].norm_sqr());
                let (dp1, dp2) = (2.0 * (v[0] * d[0].conj()).re, 2.0 * (v[1] * d[1].conj()).re);
                let hh = h[node] * (p1 + p2);
                let dhh = h[node] * (dp1 + dp2);
                let u = coeffs.u[0] * hh + coeffs.u[1] * p1 + coeffs.u[2] * p2;
                let w = coeffs.v[0] * hh + coeffs.v[1] * p1 + coeffs.v[2] * p2;
                let du = coeffs.u[0] * dhh + coeffs.u[1] * dp1 + coeffs.u[2] * dp2;
                let dw = coeffs.v[0] * dhh + coeffs.v[1] * dp1 + coeffs.v[2] * dp2;
                out[0] = dw * v[0] + w * d[0];
                out[1] = du * v[1] + u * d[1];
            }
        }
    }
}

fn block(v: &[C64], j: usize) -> [C64; 2] {
    [v[2 * j], v[2 * j + 1]]
}

fn cubic(t: &Tensor4, scale: f64, v: &[C64], out: &mut [C64]) {
    let n = t.n();
    out.fill(ZERO);
    for j in 0..n {
        for k in 0..n {
            let jk = hermitian(block(v, j), block(v, k));
            for i in 0..n {
                for l in 0..n {
                    let c = t.get(i, j, k, l);
                    if c != 0.0 {
                        let w = jk * (c * scale);
                        out[2 * i] += w * v[2 * l];
                        out[2 * i + 1] += w * v[2 * l + 1];
                    }
                }
            }
        }
    }
}

fn cubic_derivative(t: &Tensor4, scale: f64, v: &[C64], d: &[C64], out: &mut [C64]) {
    let n = t.n();
    out.fill(ZERO);
    for j in 0..n {
        for k in 0..n {
            let jk = hermitian(block(v, j), block(v, k));
            let djk = hermitian(block(d, j), block(v, k)) + hermitian(block(v, j), block(d, k));
            for i in 0..n {
                for l in 0..n {
                    let c = t.get(i, j, k, l) * scale;
                    if c != 0.0 {
                        for s in 0..2 {
                            out[2 * i + s] += (djk * v[2 * l + s] + jk * d[2 * l + s]) * c;
                        }
                    }
                }
            }
        }
    }
}

/// Pointwise `F(psi)`.
pub fn rhs_eval(spec: &ReactionSpec, psi: &SpinorField) -> Result<SpinorField> {
    spec.check(psi)?;
    let s = psi.stride();
    let mut out = SpinorField::zeros(psi.chart_arc().clone(), psi.n());
    for node in psi.chart().active_nodes() {
        let v = psi.node(node).to_vec();
        spec.eval_node(node, &v, out.node_mut(node));
    }
    debug_assert_eq!(out.values().len(), psi.chart().len() * s);
    Ok(out)
}

/// Directional derivative `dF(psi)[delta]`.
pub fn rhs_derivative(spec: &ReactionSpec, psi: &SpinorField, delta: &SpinorField) -> Result<SpinorField> {
    spec.check(psi)?;
    if !psi.same_shape(delta) {
        return Err(SpinflowError::Configuration("direction lives on a different chart".into()));
    }
    let mut out = SpinorField::zeros(psi.chart_arc().clone(), psi.n());
    for node in psi.chart().active_nodes() {
        let v = psi.node(node).to_vec();
        let d = delta.node(node).to_vec();
        spec.derivative_node(node, &v, &d, out.node_mut(node));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SpinStructure;
    use crate::rng::Rng;
    use crate::spinor::ONE;
    use std::sync::Arc;

    fn chart() -> Arc<GridChart> {
        Arc::new(GridChart::unit_torus(8, SpinStructure::AntiAnti).unwrap())
    }

    fn random(chart: Arc<GridChart>, n: usize, seed: u64) -> SpinorField {
        let mut rng = Rng::new(seed);
        let values = (0..chart.len() * 2 * n).map(|_| rng.complex_unit()).collect();
        SpinorField::from_values(chart, n, values).unwrap()
    }

    #[test]
    fn scalar_h_on_unit_spinor() {
        let c = chart();
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let psi = SpinorField::constant(c, &[ONE, ZERO]);
        assert_eq!(rhs_eval(&spec, &psi).unwrap(), psi);
    }

    #[test]
    fn presets_match_their_formulas() {
        let c = chart();
        let h = 0.7;
        let psi = random(c.clone(), 1, 2);
        for preset in [ChiralPreset::Su2, ChiralPreset::Nil, ChiralPreset::Sl2] {
            let spec = ReactionSpec::chiral_preset(&c, preset, vec![h]).unwrap();
            let out = rhs_eval(&spec, &psi).unwrap();
            for k in 0..c.len() {
                let [a, b] = psi.block(k, 0);
                let (p1, p2) = (a.norm_sqr(), b.norm_sqr());
                let p = p1 + p2;
                let (u, v) = match preset {
                    ChiralPreset::Su2 => {
                        let u = -(C64::new(h, 0.0) - I) * p;
                        (u, u.conj())
                    }
                    ChiralPreset::Nil => {
                        let u = -h * p - I * 0.5 * (p1 - p2);
                        (u, u)
                    }
                    ChiralPreset::Sl2 => (-h * p - I * (1.5 * p2 - p1), -h * p - I * (p2 - 1.5 * p1)),
                };
                let [x, y] = out.block(k, 0);
                assert!((x - v * a).norm() < 1e-14 && (y - u * b).norm() < 1e-14, "{preset:?}");
            }
        }
    }

    #[test]
    fn equal_u_and_v_is_scalar_multiplication() {
        let c = chart();
        let u = [C64::new(-1.0, 0.3), C64::new(0.2, -1.0), C64::new(0.0, 0.5)];
        let spec = ReactionSpec::chiral_uv(&c, UvCoefficients { u, v: u }, vec![0.4]).unwrap();
        let psi = random(c.clone(), 1, 8);
        let out = rhs_eval(&spec, &psi).unwrap();
        let expect = psi.map_blocks(|[a, b]| {
            let (p1, p2) = (a.norm_sqr(), b.norm_sqr());
            let w = u[0] * 0.4 * (p1 + p2) + u[1] * p1 + u[2] * p2;
            [w * a, w * b]
        });
        assert!(out.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn curvature_cubic_is_a_general_cubic() {
        let c = chart();
        let spec = ReactionSpec::curvature_cubic(Tensor4::constant_curvature(2, 1.3)).unwrap();
        let general = spec.to_general_cubic(&c).unwrap();
        let psi = random(c, 2, 4);
        let a = rhs_eval(&spec, &psi).unwrap();
        let b = rhs_eval(&general, &psi).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn curvature_symmetries_are_enforced() {
        assert_eq!(Tensor4::constant_curvature(3, 2.0).curvature_symmetry_defect(), 0.0);
        let bad = Tensor4::from_fn(2, |i, _, _, _| i as f64);
        assert!(ReactionSpec::curvature_cubic(bad).is_err());
    }

    #[test]
    fn component_mismatch_is_a_configuration_error() {
        let c = chart();
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let psi = SpinorField::zeros(c, 2);
        assert!(matches!(rhs_eval(&spec, &psi), Err(SpinflowError::Configuration(_))));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = chart();
        let specs = vec![
            ReactionSpec::scalar_h(&c, vec![0.8]).unwrap(),
            ReactionSpec::chiral_preset(&c, ChiralPreset::Sl2, vec![0.3]).unwrap(),
        ];
        for spec in specs {
            let psi = random(c.clone(), 1, 10);
            let dir = random(c.clone(), 1, 11);
            let step = 1e-5;
            let plus = rhs_eval(&spec, &psi.lin_comb(ONE, &dir, C64::new(step, 0.0))).unwrap();
            let minus = rhs_eval(&spec, &psi.lin_comb(ONE, &dir, C64::new(-step, 0.0))).unwrap();
            let fd = plus.sub(&minus).scaled(C64::new(0.5 / step, 0.0));
            let exact = rhs_derivative(&spec, &psi, &dir).unwrap();
            assert!(fd.sub(&exact).l2_norm() <= 1e-6 * exact.l2_norm());
        }
    }

    #[test]
    fn h_bounds() {
        let c = chart();
        let h: Vec<f64> = (0..c.len()).map(|k| c.coords(k)[0]).collect();
        let spec = ReactionSpec::scalar_h(&c, h).unwrap();
        assert!((spec.h0() - 0.875).abs() < 1e-15);
        assert!(spec.h1() > 0.9);
    }
}
