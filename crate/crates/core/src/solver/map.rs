use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{BeltramiCoefficient, ComplexGrid, DomainTag, GridSpec, Mobius};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Value and Wirtinger derivatives `(f, ∂f, ∂̄f)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub dz: Complex64,
    pub dzbar: Complex64,
}

impl Jet {
    pub fn jacobian(&self) -> f64 {
        self.dz.norm_sqr() - self.dzbar.norm_sqr()
    }

    pub fn dilatation(&self) -> Complex64 {
        self.dzbar / self.dz
    }

    /// Jet of `g ∘ f` where `self` is the jet of `f` at `z` and `outer` the jet of `g` at `f(z)`.
    pub fn then(&self, outer: &Jet) -> Jet {
        Jet {
            value: outer.value,
            dz: outer.dz * self.dz + outer.dzbar * self.dzbar.conj(),
            dzbar: outer.dz * self.dzbar + outer.dzbar * self.dz.conj(),
        }
    }

    fn then_mobius(&self, m: &Mobius) -> Jet {
        let d = m.derivatives(self.value)[0];
        Jet {
            value: m.apply(self.value),
            dz: d * self.dz,
            dzbar: d * self.dzbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Plane maps fixing `0`, `1` and `∞`.
    FixZeroOneInfinity,
    /// Self-maps of the disk fixing `1`, `-1` and `-i`.
    FixThreeBoundaryPoints,
}

impl Normalization {
    pub fn points(self) -> [Complex64; 3] {
        match self {
            Normalization::FixZeroOneInfinity => [ZERO, Complex64::new(1.0, 0.0), ZERO],
            Normalization::FixThreeBoundaryPoints => [
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Normalization::FixZeroOneInfinity => "fix_0_1_inf",
            Normalization::FixThreeBoundaryPoints => "fix_1_-1_-i",
        }
    }
}

/// `inner < |z| < outer` (`outer` may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r > self.inner && r < self.outer
    }
}

/// Iteration record of a Neumann solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// `‖h_{k+1} - h_k‖_{L²}` per iteration.
    pub trace: Vec<f64>,
    /// Largest observed ratio of consecutive increments.
    pub max_ratio: f64,
    /// `‖∂̄f - μ ∂f‖_∞ / ‖∂f‖_∞` at interior grid nodes outside jump bands.
    pub residual: f64,
}

/// Raw grid solution `f = z + P[h]` before renormalization.
pub(crate) struct GridSolution {
    pub f: ComplexGrid,
    pub fz: ComplexGrid,
    pub h: ComplexGrid,
    /// Radius of a disk containing the support of `h`.
    pub support_radius: f64,
    /// `(1/π) ∬ h (w/R)^n dA`, with `R = support_radius`.
    pub moments: Vec<Complex64>,
}

impl GridSolution {
    pub fn new(f: ComplexGrid, fz: ComplexGrid, h: ComplexGrid, terms: usize) -> Self {
        let spec = h.spec;
        let cell = spec.spacing();
        let mut radius: f64 = 0.0;
        for row in 0..spec.n {
            for col in 0..spec.n {
                if h.get(row, col).norm_sqr() > 0.0 {
                    radius = radius.max(spec.node(row, col).norm());
                }
            }
        }
        let radius = (radius + cell).max(cell);
        let mut moments = vec![ZERO; terms];
        let area = cell * cell / std::f64::consts::PI;
        for row in 0..spec.n {
            for col in 0..spec.n {
                let v = h.get(row, col);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let w = spec.node(row, col) / radius;
                let mut p = v * area;
                for m in moments.iter_mut() {
                    *m += p;
                    p *= w;
                }
            }
        }
        GridSolution {
            f,
            fz,
            h,
            support_radius: radius,
            moments,
        }
    }

    fn series_valid(&self, z: Complex64) -> bool {
        z.norm() >= 1.5 * self.support_radius || !self.f.spec.interpolates(z)
    }

    /// `Σ c_n (R/z)^n` and its `z`-derivative factor, for the far field.
    pub(crate) fn far_field(&self, z: Complex64) -> Jet {
        let q = self.support_radius / z;
        let mut p = Complex64::new(1.0, 0.0);
        let mut s = ZERO;
        let mut ds = ZERO;
        for (n, c) in self.moments.iter().enumerate() {
            s += c * p;
            ds += c * p * (n as f64 + 1.0);
            p *= q;
        }
        let inv = 1.0 / z;
        Jet {
            value: z + s * inv,
            dz: Complex64::new(1.0, 0.0) - ds * inv * inv,
            dzbar: ZERO,
        }
    }

    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        if !z.is_finite() {
            return Err(Error::OutsideSampledRegion(z));
        }
        if self.series_valid(z) {
            return Ok(self.far_field(z));
        }
        let value = self
            .f
            .interpolate(z)
            .ok_or(Error::OutsideSampledRegion(z))?;
        let dz = self
            .fz
            .interpolate(z)
            .ok_or(Error::OutsideSampledRegion(z))?;
        let dzbar = self
            .h
            .interpolate(z)
            .ok_or(Error::OutsideSampledRegion(z))?;
        Ok(Jet { value, dz, dzbar })
    }

    /// Jet of `s ↦ 1/f(1/s)` for small `s`, where `f` is conformal near `∞`.
    pub fn reciprocal_jet(&self, s: Complex64) -> Option<(Complex64, Complex64)> {
        let r = self.support_radius;
        if s.norm() * 1.5 * r > 1.0 {
            return None;
        }
        if s == ZERO {
            return Some((ZERO, Complex64::new(1.0, 0.0)));
        }
        // 1/f(1/s) = s / D(s), D(s) = 1 + Σ c_n R^n s^{n+2}.
        let q = r * s;
        let mut p = s * s;
        let mut d = Complex64::new(1.0, 0.0);
        let mut dd = ZERO;
        for (n, c) in self.moments.iter().enumerate() {
            d += c * p;
            dd += c * p * (n as f64 + 2.0) / s;
            p *= q;
        }
        Some((s / d, (d - s * dd) / (d * d)))
    }
}

/// Exactly known maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ClosedForm {
    Identity,
    /// `z + k z̄`.
    Affine {
        k: Complex64,
    },
    /// `z + k z̄` on `|z| < r`, `z + k r²/z` outside.
    ConstantDisk {
        k: Complex64,
        r: f64,
    },
    /// `z |z|^{α-1}`.
    Power {
        alpha: f64,
    },
}

impl ClosedForm {
    fn jet(&self, z: Complex64) -> Jet {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            ClosedForm::Identity => Jet {
                value: z,
                dz: one,
                dzbar: ZERO,
            },
            ClosedForm::Affine { k } => Jet {
                value: z + k * z.conj(),
                dz: one,
                dzbar: k,
            },
            ClosedForm::ConstantDisk { k, r } => {
                if z.norm_sqr() < r * r {
                    Jet {
                        value: z + k * z.conj(),
                        dz: one,
                        dzbar: k,
                    }
                } else {
                    Jet {
                        value: z + k * r * r / z,
                        dz: one - k * r * r / (z * z),
                        dzbar: ZERO,
                    }
                }
            }
            ClosedForm::Power { alpha } => {
                let m = z.norm();
                if m == 0.0 {
                    return Jet {
                        value: ZERO,
                        dz: ZERO,
                        dzbar: ZERO,
                    };
                }
                let g = m.powf(alpha - 1.0);
                Jet {
                    value: z * g,
                    dz: Complex64::new((alpha + 1.0) / 2.0 * g, 0.0),
                    dzbar: (alpha - 1.0) / 2.0 * g * z / z.conj(),
                }
            }
        }
    }
}

/// Disk map `a + 1/F₂(1/(F₁ - a))` glued from two plane solves.
pub(crate) struct TwoChart {
    pub f1: QuasiconformalMap,
    pub a: Complex64,
    pub f2: Arc<GridSolution>,
}

impl TwoChart {
    fn jet(&self, z: Complex64) -> Result<Jet> {
        let j1 = self.f1.jet(z)?;
        let s = j1.value - self.a;
        if let Some((v, dv)) = self.f2.reciprocal_jet(s) {
            return Ok(Jet {
                value: self.a + v,
                dz: dv * j1.dz,
                dzbar: dv * j1.dzbar,
            });
        }
        let u = 1.0 / s;
        let du = -u * u;
        let ju = Jet {
            value: u,
            dz: du * j1.dz,
            dzbar: du * j1.dzbar,
        };
        let j2 = ju.then(&self.f2.jet(u)?);
        let v = j2.value;
        let dv = -1.0 / (v * v);
        Ok(Jet {
            value: self.a + 1.0 / v,
            dz: dv * j2.dz,
            dzbar: dv * j2.dzbar,
        })
    }
}

pub(crate) enum Repr {
    Grid(Arc<GridSolution>),
    Closed(ClosedForm),
    /// `outer ∘ inner`.
    Composed(QuasiconformalMap, QuasiconformalMap),
    Inverted(QuasiconformalMap),
    TwoChart(Arc<TwoChart>),
}

struct SeedTable {
    half_width: f64,
    m: usize,
    images: Vec<Complex64>,
}

struct Inner {
    repr: Repr,
    post: Mobius,
    normalization: Normalization,
    domain: DomainTag,
    conformal_region: Option<Annulus>,
    source_mu: BeltramiCoefficient,
    diagnostics: Option<SolveDiagnostics>,
    seed_box: f64,
    seeds: OnceLock<SeedTable>,
}

/// A normalized quasiconformal map; cheap to clone.
#[derive(Clone)]
pub struct QuasiconformalMap {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for QuasiconformalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let repr = match &self.inner.repr {
            Repr::Grid(_) => "grid",
            Repr::Closed(_) => "closed_form",
            Repr::Composed(..) => "composed",
            Repr::Inverted(_) => "inverted",
            Repr::TwoChart(_) => "two_chart",
        };
        f.debug_struct("QuasiconformalMap")
            .field("repr", &repr)
            .field("domain", &self.inner.domain)
            .field("normalization", &self.inner.normalization)
            .finish()
    }
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-8;
const SEED_NODES: usize = 64;

impl QuasiconformalMap {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        repr: Repr,
        post: Mobius,
        normalization: Normalization,
        domain: DomainTag,
        conformal_region: Option<Annulus>,
        source_mu: BeltramiCoefficient,
        diagnostics: Option<SolveDiagnostics>,
        seed_box: f64,
    ) -> Self {
        QuasiconformalMap {
            inner: Arc::new(Inner {
                repr,
                post,
                normalization,
                domain,
                conformal_region,
                source_mu,
                diagnostics,
                seed_box,
                seeds: OnceLock::new(),
            }),
        }
    }

    pub fn identity(domain: DomainTag) -> Self {
        let normalization = match domain {
            DomainTag::UnitDisk => Normalization::FixThreeBoundaryPoints,
            _ => Normalization::FixZeroOneInfinity,
        };
        Self::from_parts(
            Repr::Closed(ClosedForm::Identity),
            Mobius::identity(),
            normalization,
            domain,
            Some(Annulus {
                inner: 0.0,
                outer: f64::INFINITY,
            }),
            BeltramiCoefficient::zero(domain),
            None,
            4.0,
        )
    }

    /// `z + k z̄`, normalized to fix `0, 1, ∞`.
    pub fn affine(k: Complex64) -> Result<Self> {
        let mu = BeltramiCoefficient::from_fn(
            DomainTag::Plane,
            crate::domains::Support::Full,
            k.norm(),
            crate::domains::CoefficientKind::Derived {
                description: "constant".into(),
            },
            move |_| k,
        )?;
        let post = Mobius::affine(1.0 / (1.0 + k), ZERO);
        Ok(Self::from_parts(
            Repr::Closed(ClosedForm::Affine { k }),
            post,
            Normalization::FixZeroOneInfinity,
            DomainTag::Plane,
            None,
            mu,
            None,
            4.0,
        ))
    }

    /// Exact normalized plane solution for `k χ_{|z|<r}`.
    pub fn constant_disk(k: Complex64, r: f64) -> Result<Self> {
        let mu = if r <= 1.0 {
            BeltramiCoefficient::constant_disk(k, r)?.on_plane()
        } else {
            BeltramiCoefficient::from_fn(
                DomainTag::Plane,
                crate::domains::Support::Radius(r),
                k.norm(),
                crate::domains::CoefficientKind::Derived {
                    description: format!("constant disk radius {r}"),
                },
                move |z| if z.norm_sqr() < r * r { k } else { ZERO },
            )?
            .with_breaks(vec![r], true)
        };
        let raw_one = ClosedForm::ConstantDisk { k, r }
            .jet(Complex64::new(1.0, 0.0))
            .value;
        Ok(Self::from_parts(
            Repr::Closed(ClosedForm::ConstantDisk { k, r }),
            Mobius::affine(1.0 / raw_one, ZERO),
            Normalization::FixZeroOneInfinity,
            DomainTag::Plane,
            Some(Annulus {
                inner: r,
                outer: f64::INFINITY,
            }),
            mu,
            None,
            (2.0 * r).max(2.0),
        ))
    }

    /// `z |z|^{α-1}` on the upper half-plane (fixes `0, 1, ∞`).
    pub fn power(alpha: f64) -> Result<Self> {
        let mu = BeltramiCoefficient::power_map(alpha)?;
        Ok(Self::from_parts(
            Repr::Closed(ClosedForm::Power { alpha }),
            Mobius::identity(),
            Normalization::FixZeroOneInfinity,
            DomainTag::UpperHalfPlane,
            None,
            mu,
            None,
            4.0,
        ))
    }

    pub fn domain(&self) -> DomainTag {
        self.inner.domain
    }

    pub fn normalization(&self) -> Normalization {
        self.inner.normalization
    }

    pub fn conformal_region(&self) -> Option<Annulus> {
        self.inner.conformal_region
    }

    pub fn source_mu(&self) -> &BeltramiCoefficient {
        &self.inner.source_mu
    }

    pub fn diagnostics(&self) -> Option<&SolveDiagnostics> {
        self.inner.diagnostics.as_ref()
    }

    pub(crate) fn post(&self) -> Mobius {
        self.inner.post
    }

    pub(crate) fn seed_box(&self) -> f64 {
        self.inner.seed_box
    }

    /// Grid solution underlying a plane solve, if any.
    pub(crate) fn grid_solution(&self) -> Option<&Arc<GridSolution>> {
        match &self.inner.repr {
            Repr::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// Whether the value is an exact formula rather than grid samples.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.inner.repr, Repr::Closed(_))
    }

    /// Same map with a different post-composition.
    pub(crate) fn with_post(
        &self,
        post: Mobius,
        normalization: Normalization,
        domain: DomainTag,
    ) -> Self {
        let repr = match &self.inner.repr {
            Repr::Grid(g) => Repr::Grid(g.clone()),
            Repr::Closed(c) => Repr::Closed(*c),
            Repr::Composed(a, b) => Repr::Composed(a.clone(), b.clone()),
            Repr::Inverted(f) => Repr::Inverted(f.clone()),
            Repr::TwoChart(t) => Repr::TwoChart(t.clone()),
        };
        Self::from_parts(
            repr,
            post,
            normalization,
            domain,
            self.inner.conformal_region,
            self.inner.source_mu.clone(),
            self.inner.diagnostics.clone(),
            self.inner.seed_box,
        )
    }

    fn raw_jet(&self, z: Complex64) -> Result<Jet> {
        match &self.inner.repr {
            Repr::Grid(g) => g.jet(z),
            Repr::Closed(c) => Ok(c.jet(z)),
            Repr::Composed(outer, inner) => {
                let ji = inner.jet(z)?;
                Ok(ji.then(&outer.jet(ji.value)?))
            }
            Repr::Inverted(f) => {
                let zi = f.invert_point(z, None)?;
                let j = f.jet(zi)?;
                let det = j.jacobian();
                Ok(Jet {
                    value: zi,
                    dz: j.dz.conj() / det,
                    dzbar: -j.dzbar / det,
                })
            }
            Repr::TwoChart(t) => t.jet(z),
        }
    }

    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        let j = self.raw_jet(z)?.then_mobius(&self.inner.post);
        if !(j.value.is_finite() && j.dz.is_finite() && j.dzbar.is_finite()) {
            return Err(Error::OutsideSampledRegion(z));
        }
        Ok(j)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z)?.value)
    }

    fn seed_table(&self) -> &SeedTable {
        self.inner.seeds.get_or_init(|| {
            let b = self.inner.seed_box;
            let m = SEED_NODES;
            let mut images = Vec::with_capacity(m * m);
            for row in 0..m {
                for col in 0..m {
                    let z = seed_node(b, m, row, col);
                    images.push(self.eval(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)));
                }
            }
            SeedTable {
                half_width: b,
                m,
                images,
            }
        })
    }

    /// Solves `f(z) = w` by Newton's method from `seed` or the nearest tabulated node.
    pub fn invert_point(&self, w: Complex64, seed: Option<Complex64>) -> Result<Complex64> {
        if !w.is_finite() {
            return Err(Error::InversionFailed {
                w,
                residual: f64::INFINITY,
            });
        }
        let scale = w.norm().max(1.0);
        let mut worst = f64::INFINITY;
        if let Some(s) = seed {
            match self.newton(w, s, scale) {
                Ok(z) => return Ok(z),
                Err(r) => worst = r,
            }
        }
        let mut candidates = Vec::with_capacity(2);
        let table = self.seed_table();
        let mut best = (f64::INFINITY, 0usize);
        for (k, v) in table.images.iter().enumerate() {
            let d = (v - w).norm_sqr();
            if d < best.0 {
                best = (d, k);
            }
        }
        if best.0.is_finite() {
            candidates.push(seed_node(
                table.half_width,
                table.m,
                best.1 / table.m,
                best.1 % table.m,
            ));
        }
        // Normalized maps are close to a Möbius map near infinity.
        candidates.push(self.inner.post.inverse().apply(w));
        for z0 in candidates {
            match self.newton(w, z0, scale) {
                Ok(z) => return Ok(z),
                Err(r) => worst = worst.min(r),
            }
        }
        Err(Error::InversionFailed { w, residual: worst })
    }

    fn newton(
        &self,
        w: Complex64,
        z0: Complex64,
        scale: f64,
    ) -> std::result::Result<Complex64, f64> {
        let mut z = z0;
        let mut j = match self.jet(z) {
            Ok(j) => j,
            Err(_) => return Err(f64::INFINITY),
        };
        let mut r = w - j.value;
        for _ in 0..NEWTON_MAX_ITER {
            if r.norm() <= NEWTON_TOL * scale {
                return Ok(z);
            }
            let (a, b) = (j.dz, j.dzbar);
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det > 0.0) {
                return Err(r.norm());
            }
            let delta = (a.conj() * r - b * r.conj()) / det;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let zt = z + delta * t;
                if let Ok(jt) = self.jet(zt) {
                    let rt = w - jt.value;
                    if rt.norm() < r.norm() {
                        z = zt;
                        j = jt;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r.norm() <= NEWTON_TOL * scale {
            Ok(z)
        } else {
            Err(r.norm())
        }
    }

    /// Samples of the map on `spec` (non-finite where evaluation fails).
    pub fn sample(&self, spec: GridSpec) -> ComplexGrid {
        if let Repr::Grid(g) = &self.inner.repr {
            if g.f.spec == spec {
                let post = self.inner.post;
                return ComplexGrid {
                    spec,
                    values: g.f.values.iter().map(|v| post.apply(*v)).collect(),
                };
            }
        }
        ComplexGrid::from_fn(spec, |z| {
            self.eval(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        })
    }

    /// Grid serialization of the samples on `spec`.
    pub fn to_json(&self, spec: GridSpec) -> serde_json::Value {
        let mut v = self
            .sample(spec)
            .to_json(self.inner.domain, self.inner.normalization.tag());
        if let Some(d) = &self.inner.diagnostics {
            v["diagnostics"] = serde_json::to_value(d).unwrap_or(serde_json::Value::Null);
        }
        v
    }

    /// Largest deviation of the normalization points from themselves.
    pub fn normalization_defect(&self) -> Result<f64> {
        let pts = self.inner.normalization.points();
        let mut worst: f64 = 0.0;
        match self.inner.normalization {
            Normalization::FixZeroOneInfinity => {
                for p in &pts[..2] {
                    worst = worst.max((self.eval(*p)? - p).norm());
                }
                // Growth at infinity: f(z)/z stays bounded and nonzero.
                let big = Complex64::new(1e6, 1e6);
                let ratio = self.eval(big)? / big;
                if !(ratio.norm() > 1e-3 && ratio.norm() < 1e3) {
                    worst = worst.max(f64::INFINITY);
                }
            }
            Normalization::FixThreeBoundaryPoints => {
                for p in &pts {
                    worst = worst.max((self.eval(*p)? - p).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Smallest Jacobian over `spec` nodes inside the domain.
    pub fn min_jacobian(&self, spec: GridSpec) -> Result<(f64, Complex64)> {
        let mut best = (f64::INFINITY, ZERO);
        for row in 0..spec.n {
            for col in 0..spec.n {
                let z = spec.node(row, col);
                if !self.inner.domain.contains(z) {
                    continue;
                }
                let j = self.jet(z)?.jacobian();
                if j < best.0 {
                    best = (j, z);
                }
            }
        }
        Ok(best)
    }
}

fn seed_node(b: f64, m: usize, row: usize, col: usize) -> Complex64 {
    let step = 2.0 * b / (m - 1) as f64;
    Complex64::new(-b + col as f64 * step, -b + row as f64 * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_disk_closed_form_values() {
        let f = QuasiconformalMap::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        assert!((f.eval(c(2.0, 0.0)).unwrap() - c(2.0375 / 1.075, 0.0)).norm() < 1e-14);
        assert!(f.normalization_defect().unwrap() < 1e-14);
        let g = QuasiconformalMap::constant_disk(c(0.3, 0.0), 1.0).unwrap();
        assert!((g.eval(c(0.0, 1.0)).unwrap() - c(0.0, 0.7 / 1.3)).norm() < 1e-14);
        // Continuity across the circle.
        let z = Complex64::from_polar(0.5, 0.7);
        let a = f.eval(z * (1.0 - 1e-12)).unwrap();
        let b = f.eval(z * (1.0 + 1e-12)).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn closed_form_dilatations() {
        let f = QuasiconformalMap::constant_disk(c(0.2, 0.1), 0.5).unwrap();
        let j = f.jet(c(0.1, 0.2)).unwrap();
        assert!((j.dilatation() - c(0.2, 0.1)).norm() < 1e-14);
        assert!(f.jet(c(1.0, 0.3)).unwrap().dilatation().norm() < 1e-15);
        let p = QuasiconformalMap::power(2.0).unwrap();
        let z = c(0.3, 0.8);
        let mu = p.source_mu().eval(z);
        assert!((p.jet(z).unwrap().dilatation() - mu).norm() < 1e-14);
    }

    #[test]
    fn newton_inverts_closed_forms() {
        let f = QuasiconformalMap::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        for w in [c(0.1, 0.05), c(1.2, -0.7), c(-3.0, 2.0), c(40.0, 1.0)] {
            let z = f.invert_point(w, None).unwrap();
            assert!((f.eval(z).unwrap() - w).norm() < 1e-8 * w.norm().max(1.0));
        }
    }

    #[test]
    fn jet_chain_rule_matches_finite_differences() {
        let f = QuasiconformalMap::affine(c(0.2, -0.1)).unwrap();
        let g = QuasiconformalMap::power(1.5).unwrap();
        let comp = QuasiconformalMap::from_parts(
            Repr::Composed(g.clone(), f.clone()),
            Mobius::identity(),
            Normalization::FixZeroOneInfinity,
            DomainTag::Plane,
            None,
            BeltramiCoefficient::zero(DomainTag::Plane),
            None,
            4.0,
        );
        let z = c(0.4, 0.9);
        let j = comp.jet(z).unwrap();
        let e = 1e-6;
        let fx = (comp.eval(z + e).unwrap() - comp.eval(z - e).unwrap()) / (2.0 * e);
        let fy =
            (comp.eval(z + c(0.0, e)).unwrap() - comp.eval(z - c(0.0, e)).unwrap()) / (2.0 * e);
        let dz = (fx - Complex64::i() * fy) * 0.5;
        let dzbar = (fx + Complex64::i() * fy) * 0.5;
        assert!((j.dz - dz).norm() < 1e-7);
        assert!((j.dzbar - dzbar).norm() < 1e-7);
    }
}
