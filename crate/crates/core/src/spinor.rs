//! Sampled spinor fields and the pointwise quantities built from them.
//!
//! A field with `n` components stores, at each node, `n` blocks of two
//! complex numbers `(psi^i_1, psi^i_2)`. Blocks are contiguous per node.
//!
//! The Hermitian product is conjugate-linear in the second slot:
//! `<a, b> = a_1 conj(b_1) + a_2 conj(b_2)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::chart::{GridChart, Region};
use crate::error::{Result, SpinflowError};
use crate::quadrature::pairwise_sum_by;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `<a, b>` for two-component spinors.
#[inline]
pub fn hermitian(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// A spinor field with `n` components on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    chart: Arc<GridChart>,
    n: usize,
    values: Vec<C64>,
    pub tag: String,
}

impl SpinorField {
    pub fn zeros(chart: Arc<GridChart>, n: usize) -> Self {
        assert!(n >= 1, "spinor fields need at least one component");
        let len = chart.len() * 2 * n;
        Self { chart, n, values: vec![ZERO; len], tag: String::new() }
    }

    /// Build from raw values. Entries on outside nodes are reset to zero.
    pub fn from_values(chart: Arc<GridChart>, n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(SpinflowError::InvalidField("component count must be at least 1".into()));
        }
        if values.len() != chart.len() * 2 * n {
            return Err(SpinflowError::InvalidField(format!(
                "expected {} values, got {}",
                chart.len() * 2 * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SpinflowError::InvalidField("non-finite value".into()));
        }
        let mut field = Self { chart, n, values, tag: String::new() };
        field.clear_outside();
        Ok(field)
    }

    /// Sample `f(x, y)` at every active node; `f` returns the `2n` complex
    /// components of the node.
    pub fn from_fn(chart: Arc<GridChart>, n: usize, f: impl Fn([f64; 2]) -> Vec<C64>) -> Self {
        let mut field = Self::zeros(chart, n);
        for k in 0..field.chart.len() {
            if !field.chart.is_active(k) {
                continue;
            }
            let v = f(field.chart.coords(k));
            assert_eq!(v.len(), 2 * n, "sample function returned the wrong number of components");
            field.node_mut(k).copy_from_slice(&v);
        }
        field
    }

    /// Constant field (on active nodes).
    pub fn constant(chart: Arc<GridChart>, value: &[C64]) -> Self {
        assert!(value.len() >= 2 && value.len().is_multiple_of(2));
        let v = value.to_vec();
        Self::from_fn(chart, value.len() / 2, move |_| v.clone())
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn chart_arc(&self) -> &Arc<GridChart> {
        &self.chart
    }

    /// Number of spinor components `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Complex values per node (`2n`).
    pub fn stride(&self) -> usize {
        2 * self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn node(&self, k: usize) -> &[C64] {
        let s = self.stride();
        &self.values[k * s..(k + 1) * s]
    }

    #[inline]
    pub fn node_mut(&mut self, k: usize) -> &mut [C64] {
        let s = self.stride();
        &mut self.values[k * s..(k + 1) * s]
    }

    /// Block `i` (0-based component) at node `k`.
    #[inline]
    pub fn block(&self, k: usize, i: usize) -> [C64; 2] {
        let base = k * self.stride() + 2 * i;
        [self.values[base], self.values[base + 1]]
    }

    #[inline]
    pub fn set_block(&mut self, k: usize, i: usize, v: [C64; 2]) {
        let base = k * self.stride() + 2 * i;
        self.values[base] = v[0];
        self.values[base + 1] = v[1];
    }

    /// A field of the same shape holding `f` applied blockwise.
    pub fn map_blocks(&self, f: impl Fn([C64; 2]) -> [C64; 2]) -> Self {
        let mut out = self.clone();
        for pair in out.values.chunks_exact_mut(2) {
            let r = f([pair[0], pair[1]]);
            pair[0] = r[0];
            pair[1] = r[1];
        }
        out.clear_outside();
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: C64, other: &SpinorField, b: C64) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        let mut out = self.clone();
        for (o, x) in out.values.iter_mut().zip(&other.values) {
            *o = a * *o + b * x;
        }
        out
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        self.lin_comb(crate::spinor::ONE, other, crate::spinor::ONE)
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        self.lin_comb(crate::spinor::ONE, other, -crate::spinor::ONE)
    }

    /// Checks the field invariants: finite values and zeros off the chart.
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SpinflowError::InvalidField(format!("field `{}` has non-finite values", self.tag)));
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &SpinorField) -> bool {
        self.n == other.n && self.chart.compatible(&other.chart)
    }

    pub(crate) fn clear_outside(&mut self) {
        let s = self.stride();
        for k in 0..self.chart.len() {
            if !self.chart.is_active(k) {
                self.values[k * s..(k + 1) * s].fill(ZERO);
            }
        }
    }

    /// `|psi|^2 = sum_i <psi^i, psi^i>` at node `k`.
    #[inline]
    pub fn norm_sqr_at(&self, k: usize) -> f64 {
        self.node(k).iter().map(|v| v.norm_sqr()).sum()
    }

    /// Pointwise norm `|psi|` at every node.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        (0..self.chart.len()).map(|k| self.norm_sqr_at(k).sqrt()).collect()
    }

    /// `int |psi|^4` over a region.
    pub fn energy(&self, region: &Region) -> f64 {
        let nodes = self.chart.region_nodes(region);
        self.energy_on(&nodes)
    }

    /// `int |psi|^4` over an explicit, already sorted node list.
    pub fn energy_on(&self, nodes: &[usize]) -> f64 {
        pairwise_sum_by(nodes.len(), |m| {
            let k = nodes[m];
            let s = self.norm_sqr_at(k);
            self.chart.weight(k) * s * s
        })
    }

    /// Total energy over every active node.
    pub fn total_energy(&self) -> f64 {
        self.energy(&Region::All)
    }

    /// Discrete `L^p` norm with the energy quadrature; `p = f64::INFINITY`
    /// gives the maximum of `|psi|` over the region.
    pub fn lp_norm(&self, p: f64, region: &Region) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(SpinflowError::Precondition(format!("L^p norm needs p >= 1, got {p}")));
        }
        let nodes = self.chart.region_nodes(region);
        Ok(lp_of(&self.chart, &nodes, |k| self.norm_sqr_at(k).sqrt(), p))
    }

    /// Discrete `L^2` norm over all active nodes.
    pub fn l2_norm(&self) -> f64 {
        let nodes: Vec<usize> = self.chart.active_nodes().collect();
        lp_of(&self.chart, &nodes, |k| self.norm_sqr_at(k).sqrt(), 2.0)
    }

    /// `int <self, other>` over all active nodes.
    pub fn inner(&self, other: &SpinorField) -> C64 {
        assert!(self.same_shape(other));
        let nodes: Vec<usize> = self.chart.active_nodes().collect();
        let s = self.stride();
        let term = |m: usize, part: bool| {
            let k = nodes[m];
            let mut acc = ZERO;
            for c in 0..s {
                acc += self.values[k * s + c] * other.values[k * s + c].conj();
            }
            let w = self.chart.weight(k);
            if part { w * acc.re } else { w * acc.im }
        };
        C64::new(pairwise_sum_by(nodes.len(), |m| term(m, true)), pairwise_sum_by(nodes.len(), |m| term(m, false)))
    }

    /// Largest absolute difference between two fields of the same shape.
    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `(sum_k w_k f(k)^p)^(1/p)` over the given nodes.
pub fn lp_of(chart: &GridChart, nodes: &[usize], f: impl Fn(usize) -> f64, p: f64) -> f64 {
    if p.is_infinite() {
        return nodes.iter().map(|&k| f(k)).fold(0.0, f64::max);
    }
    let s = pairwise_sum_by(nodes.len(), |m| {
        let k = nodes[m];
        chart.weight(k) * f(k).powf(p)
    });
    s.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SpinStructure;
    use proptest::prelude::*;

    fn torus(n: usize) -> Arc<GridChart> {
        Arc::new(GridChart::unit_torus(n, SpinStructure::AntiAnti).unwrap())
    }

    fn wavy(chart: Arc<GridChart>, n: usize) -> SpinorField {
        SpinorField::from_fn(chart, n, move |[x, y]| {
            (0..2 * n)
                .map(|c| {
                    let c = c as f64 + 1.0;
                    C64::new((c * x + 0.3).sin() * y.cos(), (x - c * y).cos())
                })
                .collect()
        })
    }

    #[test]
    fn norm_of_zero_field() {
        let f = SpinorField::zeros(torus(8), 1);
        assert!(f.pointwise_norm().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn norm_of_three_four_i() {
        let f = SpinorField::constant(torus(8), &[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        assert!(f.pointwise_norm().iter().all(|&v| (v - 5.0).abs() < 1e-15));
    }

    #[test]
    fn norm_sums_components() {
        let f = SpinorField::constant(torus(8), &[ONE, ZERO, ZERO, ONE]);
        assert!(f.pointwise_norm().iter().all(|&v| (v - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn unit_field_has_unit_energy() {
        let f = SpinorField::constant(torus(16), &[ONE, ZERO]);
        assert!((f.total_energy() - 1.0).abs() < 1e-14);
        assert_eq!(SpinorField::zeros(torus(16), 1).total_energy(), 0.0);
    }

    #[test]
    fn empty_region_has_zero_energy() {
        let f = SpinorField::constant(torus(16), &[ONE, ZERO]);
        assert_eq!(f.energy(&Region::Nodes(vec![])), 0.0);
    }

    #[test]
    fn band_limited_energy_matches_closed_form() {
        // psi = (cos(2 pi x), 0): |psi|^4 = cos^4, mean 3/8.
        for n in [16, 32] {
            let f = SpinorField::from_fn(torus(n), 1, |[x, _]| {
                vec![C64::new((2.0 * std::f64::consts::PI * x).cos(), 0.0), ZERO]
            });
            assert!((f.total_energy() - 0.375).abs() < 1e-13);
        }
    }

    #[test]
    fn lp_norm_special_cases() {
        let f = wavy(torus(16), 2);
        let e = f.total_energy();
        let l4 = f.lp_norm(4.0, &Region::All).unwrap();
        assert!((l4.powi(4) - e).abs() < 1e-12 * e);

        let one = SpinorField::constant(torus(16), &[ONE, ZERO]);
        assert_eq!(one.lp_norm(f64::INFINITY, &Region::All).unwrap(), 1.0);

        let p = 4.0 / 3.0;
        let base = f.lp_norm(p, &Region::All).unwrap();
        let scaled = f.scaled(C64::new(-2.5, 0.0)).lp_norm(p, &Region::All).unwrap();
        assert!((scaled - 2.5 * base).abs() < 1e-12 * scaled);

        assert!(f.lp_norm(0.5, &Region::All).is_err());
    }

    #[test]
    fn energy_is_additive_over_partitions() {
        let f = wavy(torus(32), 1);
        let all: Vec<usize> = (0..f.chart().len()).collect();
        let (a, b): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&k| (k * 7919) % 5 < 2);
        let whole = f.energy_on(&all);
        let parts = f.energy_on(&a) + f.energy_on(&b);
        assert!((whole - parts).abs() <= 4.0 * f64::EPSILON * whole);
    }

    #[test]
    fn outside_nodes_carry_no_data() {
        let chart = Arc::new(GridChart::disk(1.0, 17).unwrap());
        let f = SpinorField::constant(chart.clone(), &[ONE, ONE]);
        for k in 0..chart.len() {
            if !chart.is_active(k) {
                assert!(f.node(k).iter().all(|v| *v == ZERO));
            }
        }
    }

    #[test]
    fn from_values_rejects_nan() {
        let chart = torus(8);
        let mut v = vec![ZERO; chart.len() * 2];
        v[3] = C64::new(f64::NAN, 0.0);
        assert!(SpinorField::from_values(chart, 1, v).is_err());
    }

    proptest! {
        #[test]
        fn energy_is_four_homogeneous(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let f = wavy(torus(16), 1);
            let c = C64::new(re, im);
            let e = f.total_energy();
            let ec = f.scaled(c).total_energy();
            let expect = c.norm().powi(4) * e;
            prop_assert!((ec - expect).abs() <= 1e-12 * expect.max(1e-300));
        }
    }
}
