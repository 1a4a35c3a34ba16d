//! Reduction of quasi-states and quasi-morphisms from the disk bundle E to
//! the base sphere, with pluggable oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::disk_bundle::{
    liouville_integral, lift, BaseFunction, BundleField, ChartPoint, GridSpec, LiftedFlow, Radial, ThetaProfile,
};
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::quadrature::integrate_1d;
use crate::reeb_median::{zeta_med, QuasiStateOracle};
use crate::sphere_field::{cap_mask, cap_radius, steps_for, trapezoid, HamiltonianPath, ScalarField, SphereMesh};

/// Largest slice mean accepted as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// Functional on functions of E.
pub trait BundleQuasiState: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, f: &BundleField) -> Result<f64>;
}

/// F ↦ F(e) at a fixed point of E.
#[derive(Debug, Clone, Copy)]
pub struct PointEvaluation {
    pub point: ChartPoint,
}

impl BundleQuasiState for PointEvaluation {
    fn name(&self) -> &str {
        "point"
    }

    fn evaluate(&self, f: &BundleField) -> Result<f64> {
        f.value(&self.point)
    }
}

/// The median quasi-state of the restriction to the zero section.
#[derive(Debug, Clone)]
pub struct ZeroSectionMedian {
    pub mesh: Arc<SphereMesh>,
}

impl ZeroSectionMedian {
    /// Values of f on the zero section over the mesh vertices. Lifts of
    /// fields on the same mesh are read off directly.
    pub fn restrict(&self, f: &BundleField) -> Result<ScalarField> {
        if let BundleField::Structured { radial, base: BaseFunction::Mesh(h) } = f {
            if Arc::ptr_eq(h.mesh(), &self.mesh) {
                return Ok(h.scale(radial.value(0.0)));
            }
        }
        let values = self
            .mesh
            .vertices()
            .iter()
            .map(|&p| f.value(&ChartPoint::over(p, 0.0, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        ScalarField::new(&self.mesh, values)
    }
}

impl BundleQuasiState for ZeroSectionMedian {
    fn name(&self) -> &str {
        "median"
    }

    fn evaluate(&self, f: &BundleField) -> Result<f64> {
        zeta_med(&self.restrict(f)?)
    }
}

/// Liouville mean ∫F ω²/2 / ∫ω²/2 of structured fields.
#[derive(Debug, Clone)]
pub struct BundleMean {
    pub mesh: Arc<SphereMesh>,
    pub grid: GridSpec,
}

impl BundleQuasiState for BundleMean {
    fn name(&self) -> &str {
        "mean"
    }

    fn evaluate(&self, f: &BundleField) -> Result<f64> {
        let BundleField::Structured { radial, base } = f else {
            return Err(Error::Config("the mean oracle needs a field of the form ρ(r)·π*H".into()));
        };
        let h = base.sample(&self.mesh)?;
        let one = ScalarField::constant(&self.mesh, 1.0);
        let vol = liouville_integral(&Radial::one(), &one, 1.0, self.grid)?;
        Ok(liouville_integral(radial, &h, 1.0, self.grid)? / vol)
    }
}

/// Parses `median`, `mean` or `point:x,y,z[,r,phi]`.
pub fn parse_zeta(spec: &str, mesh: &Arc<SphereMesh>, grid: GridSpec) -> Result<Box<dyn BundleQuasiState>> {
    match spec.trim() {
        "median" => Ok(Box::new(ZeroSectionMedian { mesh: Arc::clone(mesh) })),
        "mean" => Ok(Box::new(BundleMean { mesh: Arc::clone(mesh), grid })),
        s => {
            let Some(rest) = s.strip_prefix("point:") else {
                return Err(Error::UnknownOracle(s.to_string()));
            };
            let xs = parse_numbers(rest)?;
            let (p, r, phi) = match xs[..] {
                [x, y, z] => ([x, y, z], 0.0, 0.0),
                [x, y, z, r, phi] => ([x, y, z], r, phi),
                _ => return Err(Error::Parse(format!("point needs 3 or 5 numbers, got `{rest}`"))),
            };
            if geom::norm(p) == 0.0 || !(0.0..1.0).contains(&r) {
                return Err(Error::Parse(format!("bad point `{rest}`")));
            }
            Ok(Box::new(PointEvaluation {
                point: ChartPoint::over(geom::normalize(p), r, phi),
            }))
        }
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
        .collect()
}

/// ζ̄_θ(F) = ζ(Θ(F))/ζ(θ).
pub fn reduce_quasi_state(zeta: &dyn BundleQuasiState, theta: ThetaProfile, f: &ScalarField) -> Result<f64> {
    let norm = profile_value(zeta, theta)?;
    Ok(zeta.evaluate(&lift(f, theta))? / norm)
}

fn profile_value(zeta: &dyn BundleQuasiState, theta: ThetaProfile) -> Result<f64> {
    let norm = zeta.evaluate(&BundleField::radial(theta))?;
    if norm > 0.0 {
        Ok(norm)
    } else {
        Err(Error::ProfileNotPositive(norm))
    }
}

/// ζ̄_θ as a quasi-state oracle on the base, with ζ(θ) computed once.
pub struct ReducedQuasiState {
    zeta: Arc<dyn BundleQuasiState>,
    theta: ThetaProfile,
    norm: f64,
    name: String,
}

impl ReducedQuasiState {
    pub fn new(zeta: Arc<dyn BundleQuasiState>, theta: ThetaProfile) -> Result<Self> {
        let norm = profile_value(zeta.as_ref(), theta)?;
        let name = format!("reduced({}, eps={})", zeta.name(), theta.eps());
        Ok(ReducedQuasiState { zeta, theta, norm, name })
    }

    /// ζ(θ).
    pub fn normalizer(&self) -> f64 {
        self.norm
    }
}

impl QuasiStateOracle for ReducedQuasiState {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, h: &ScalarField) -> Result<f64> {
        Ok(self.zeta.evaluate(&lift(h, self.theta))? / self.norm)
    }
}

/// Functional on Hamiltonian paths of the sphere.
pub trait PathQuasiMorphismOracle: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, path: &HamiltonianPath) -> Result<f64>;
    /// B with |μ(F) − μ(G)| ≤ B·∫₀¹ max|F_t − G_t| dt.
    fn stability(&self) -> Option<f64>;
    fn defect(&self) -> Option<f64>;
}

/// μ ≡ 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroQm;

impl PathQuasiMorphismOracle for ZeroQm {
    fn name(&self) -> &str {
        "zero"
    }
    fn evaluate(&self, _: &HamiltonianPath) -> Result<f64> {
        Ok(0.0)
    }
    fn stability(&self) -> Option<f64> {
        Some(1.0)
    }
    fn defect(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// ∫₀¹∫_U F_t dt over a vertex mask U, trapezoid in time. On paths supported
/// in U this is the Calabi homomorphism; off U it is the restricted integral.
#[derive(Debug, Clone)]
pub struct CalabiQm {
    mask: Vec<bool>,
    area: f64,
}

impl CalabiQm {
    pub fn new(mesh: &SphereMesh, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != mesh.num_vertices() {
            return Err(Error::FieldLength {
                expected: mesh.num_vertices(),
                got: mask.len(),
            });
        }
        let area = mask.iter().zip(mesh.weights()).filter(|(m, _)| **m).map(|(_, w)| w).sum();
        Ok(CalabiQm { mask, area })
    }

    pub fn cap(mesh: &SphereMesh, center: Vec3, area: f64) -> Result<Self> {
        Self::new(mesh, cap_mask(mesh, center, area))
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Weighted area of the mask.
    pub fn area(&self) -> f64 {
        self.area
    }

    fn slice_integral(&self, h: &ScalarField) -> f64 {
        h.values()
            .iter()
            .zip(h.mesh().weights())
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|((v, w), _)| v * w)
            .sum()
    }
}

impl PathQuasiMorphismOracle for CalabiQm {
    fn name(&self) -> &str {
        "calabi"
    }

    fn evaluate(&self, path: &HamiltonianPath) -> Result<f64> {
        if path.mesh().num_vertices() != self.mask.len() {
            return Err(Error::MeshMismatch);
        }
        let per_slice: Vec<f64> = path.slices().iter().map(|s| self.slice_integral(s)).collect();
        Ok(trapezoid(&per_slice, path.spacing()))
    }

    fn stability(&self) -> Option<f64> {
        Some(self.area)
    }

    fn defect(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Parses `zero` or `calabi:x,y,z,area` (a cap mask).
pub fn parse_mu(spec: &str, mesh: &Arc<SphereMesh>) -> Result<Box<dyn PathQuasiMorphismOracle>> {
    match spec.trim() {
        "zero" => Ok(Box::new(ZeroQm)),
        s => {
            let Some(rest) = s.strip_prefix("calabi:") else {
                return Err(Error::UnknownOracle(s.to_string()));
            };
            match parse_numbers(rest)?[..] {
                [x, y, z, a] if geom::norm([x, y, z]) > 0.0 && a > 0.0 && a <= 1.0 => {
                    Ok(Box::new(CalabiQm::cap(mesh, [x, y, z], a)?))
                }
                _ => Err(Error::Parse(format!("calabi mask needs x,y,z,area, got `{rest}`"))),
            }
        }
    }
}

/// ζ_μ(H) = (∫H − μ(H − mean H))/vol for the constant path.
pub fn qs_from_qm(mu: &dyn PathQuasiMorphismOracle, h: &ScalarField, vol: f64) -> Result<f64> {
    if mu.stability().is_none() {
        return Err(Error::NotStable(mu.name().to_string()));
    }
    let hn = h.normalized();
    Ok((h.integrate() - mu.evaluate(&HamiltonianPath::autonomous(&hn))?) / vol)
}

/// Largest |μ(F) − μ(G)| / (B·∫₀¹ max|F_t − G_t| dt) over the pairs; at most
/// one when the stability claim holds.
pub fn stability_ratio(mu: &dyn PathQuasiMorphismOracle, pairs: &[(HamiltonianPath, HamiltonianPath)]) -> Result<f64> {
    let b = mu.stability().ok_or_else(|| Error::NotStable(mu.name().to_string()))?;
    let mut worst: f64 = 0.0;
    for (f, g) in pairs {
        let diff = g.scale(-1.0).add(f)?;
        let sup: Vec<f64> = diff.slices().iter().map(|s| s.sup_norm()).collect();
        let dist = trapezoid(&sup, diff.spacing());
        let delta = (mu.evaluate(f)? - mu.evaluate(g)?).abs();
        if delta > 0.0 {
            worst = worst.max(if dist > 0.0 { delta / (b * dist) } else { f64::INFINITY });
        }
    }
    Ok(worst)
}

/// The path ρ(r)·π*F_t on E.
#[derive(Debug, Clone)]
pub struct LiftedPath {
    pub radial: Radial,
    pub base: HamiltonianPath,
}

impl LiftedPath {
    /// Θ_ε(F).
    pub fn new(theta: ThetaProfile, base: HamiltonianPath) -> Self {
        LiftedPath {
            radial: theta.into(),
            base,
        }
    }
}

/// Functional on Hamiltonian paths of E that are lifts.
pub trait BundlePathQuasiMorphism: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, path: &LiftedPath) -> Result<f64>;
    fn defect(&self) -> Option<f64>;
}

/// How [`CalabiOnE`] integrates each time slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EQuadrature {
    /// Radial Gauss rule times the restricted mesh integral, using that the
    /// Liouville density splits as 2r(1 − r²)·σ after the φ integral.
    Factored,
    /// Four-dimensional quadrature over both charts.
    Full(GridSpec),
}

/// Calabi integral over the region π⁻¹(U) ∩ {r_min ≤ r ≤ r_max}. Both pieces
/// are invariant under lifted flows of paths supported in U, since those
/// preserve r. U is the whole base when `base_mask` is `None`.
#[derive(Debug, Clone)]
pub struct CalabiOnE {
    pub base_mask: Option<Vec<bool>>,
    pub r_min: f64,
    pub r_max: f64,
    pub quadrature: EQuadrature,
}

impl CalabiOnE {
    /// Calabi on the collar {r > 1 − ε₀} over the whole base.
    pub fn collar(eps0: f64, quadrature: EQuadrature) -> Self {
        CalabiOnE {
            base_mask: None,
            r_min: 1.0 - eps0,
            r_max: 1.0,
            quadrature,
        }
    }

    /// ∫ ρ(r)·2r(1 − r²) dr over [r_min, r_max].
    pub fn radial_weight(&self, radial: &Radial) -> f64 {
        let mut breaks = vec![self.r_min];
        if let Some(t) = radial.theta().filter(|t| !t.is_limit()) {
            let (a, b) = t.knots();
            breaks.extend([a, b].into_iter().filter(|&k| k > self.r_min && k < self.r_max));
        }
        breaks.push(self.r_max);
        integrate_1d(|r| radial.value(r) * 2.0 * r * (1.0 - r * r), &breaks, 8)
    }

    fn masked(&self, h: &ScalarField) -> Result<ScalarField> {
        match &self.base_mask {
            None => Ok(h.clone()),
            Some(m) => {
                if m.len() != h.values().len() {
                    return Err(Error::MeshMismatch);
                }
                ScalarField::new(
                    h.mesh(),
                    h.values().iter().zip(m).map(|(&v, &b)| if b { v } else { 0.0 }).collect(),
                )
            }
        }
    }

    fn slice(&self, radial: &Radial, h: &ScalarField) -> Result<f64> {
        let h = self.masked(h)?;
        match self.quadrature {
            EQuadrature::Factored => Ok(self.radial_weight(radial) * h.integrate()),
            EQuadrature::Full(grid) => {
                let outer = liouville_integral(radial, &h, self.r_max, grid)?;
                let inner = if self.r_min > 0.0 {
                    liouville_integral(radial, &h, self.r_min, grid)?
                } else {
                    0.0
                };
                Ok(outer - inner)
            }
        }
    }
}

impl BundlePathQuasiMorphism for CalabiOnE {
    fn name(&self) -> &str {
        "calabi-e"
    }

    fn evaluate(&self, path: &LiftedPath) -> Result<f64> {
        let per_slice = path
            .base
            .slices()
            .iter()
            .map(|s| self.slice(&path.radial, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(&per_slice, path.base.spacing()))
    }

    fn defect(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// μ̂(F) = μ(Θ_ε(F)) and μ̄ = μ̂/normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedQm {
    pub hat: f64,
    pub bar: f64,
}

fn check_normalized(path: &HamiltonianPath) -> Result<()> {
    for (slice, s) in path.slices().iter().enumerate() {
        let mean = s.integrate();
        if mean.abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { slice, mean });
        }
    }
    Ok(())
}

/// Path with every slice shifted to zero mean; it generates the same flow.
pub fn normalize_path(path: &HamiltonianPath) -> Result<HamiltonianPath> {
    HamiltonianPath::from_slices(path.slices().iter().map(|s| s.normalized()).collect())
}

pub fn reduce_quasi_morphism(
    mu: &dyn BundlePathQuasiMorphism,
    eps: f64,
    f: &HamiltonianPath,
    normalizer: f64,
) -> Result<ReducedQm> {
    if !(normalizer > 0.0) {
        return Err(Error::BadNormalizer(normalizer));
    }
    let theta = ThetaProfile::new(eps)?;
    check_normalized(f)?;
    let hat = mu.evaluate(&LiftedPath::new(theta, f.clone()))?;
    Ok(ReducedQm {
        hat,
        bar: hat / normalizer,
    })
}

/// Sampled defect of μ̂ on composed pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub max_defect: f64,
    /// 2D(μ) when μ declares a defect.
    pub bound: Option<f64>,
    pub pairs: usize,
}

/// max |μ̂(F#G) − μ̂(F) − μ̂(G)| with F#G renormalized slice-wise.
pub fn sampled_defect(
    mu: &dyn BundlePathQuasiMorphism,
    eps: f64,
    pairs: &[(HamiltonianPath, HamiltonianPath)],
    dt: f64,
) -> Result<DefectReport> {
    let mut worst: f64 = 0.0;
    for (f, g) in pairs {
        let fg = normalize_path(&crate::sphere_field::compose(f, g, dt)?)?;
        let d = reduce_quasi_morphism(mu, eps, &fg, 1.0)?.hat
            - reduce_quasi_morphism(mu, eps, f, 1.0)?.hat
            - reduce_quasi_morphism(mu, eps, g, 1.0)?.hat;
        worst = worst.max(d.abs());
    }
    Ok(DefectReport {
        max_defect: worst,
        bound: mu.defect().map(|d| 2.0 * d),
        pairs: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs − rhs| / max(1, |rhs|).
    pub residual: f64,
}

/// μ(λ(t)H) against (∫₀¹λ)·μ(H) with the time profile sampled on
/// `intervals` steps.
pub fn scale_identity_check(
    mu: &dyn PathQuasiMorphismOracle,
    lambda: impl Fn(f64) -> f64,
    h: &ScalarField,
    intervals: usize,
) -> Result<ScaleReport> {
    if intervals == 0 {
        return Err(Error::Config("need at least one time interval".into()));
    }
    let slices = (0..=intervals)
        .map(|k| h.scale(lambda(k as f64 / intervals as f64)))
        .collect();
    let lhs = mu.evaluate(&HamiltonianPath::from_slices(slices)?)?;
    let rhs = integrate_1d(&lambda, &[0.0, 1.0], 16) * mu.evaluate(&HamiltonianPath::autonomous(h))?;
    Ok(ScaleReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs().max(1.0),
    })
}

/// Sample-based disjointness certificate for the lifted displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementCertificate {
    /// Smallest angular distance from the base of an image sample to X.
    /// Infinite when X is empty.
    pub separation: f64,
    pub samples: usize,
    pub vacuous: bool,
}

/// A closed cap X in the base, or nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseSet {
    Empty,
    Cap { center: Vec3, area: f64 },
}

/// Lifts a displacing path G of X to Θ_ε(G) and certifies that its time-one
/// map moves X̃_a = π⁻¹(X) ∩ {r ≤ a} off itself.
///
/// Samples are the center and `samples` boundary points of X at radii 0,
/// a/2 and a with four fiber angles each.
pub fn lift_displacer(
    g: &HamiltonianPath,
    x: BaseSet,
    eps: f64,
    a: f64,
    samples: usize,
    dt: f64,
) -> Result<(LiftedPath, DisplacementCertificate)> {
    let theta = ThetaProfile::new(eps)?;
    if !(a >= 0.0 && a < 1.0 - eps) {
        return Err(Error::RadiusTooLarge { a, eps });
    }
    let path = LiftedPath::new(theta, g.clone());
    let BaseSet::Cap { center, area } = x else {
        let cert = DisplacementCertificate {
            separation: f64::INFINITY,
            samples: 0,
            vacuous: true,
        };
        return Ok((path, cert));
    };
    let c = geom::normalize(center);
    let rho = cap_radius(area);
    let e1 = geom::orthogonal(c);
    let e2 = geom::cross(c, e1);
    let mut base = vec![c];
    for i in 0..samples {
        let t = 2.0 * PI * i as f64 / samples as f64;
        let dir = geom::add(geom::scale(e1, t.cos()), geom::scale(e2, t.sin()));
        base.push(geom::add(geom::scale(c, rho.cos()), geom::scale(dir, rho.sin())));
    }
    let steps = steps_for(g, dt)?;
    let flow = LiftedFlow::new(g, theta)?;
    let mut separation = f64::INFINITY;
    let mut count = 0;
    for &p in &base {
        for r in [0.0, 0.5 * a, a] {
            for j in 0..4 {
                let e = ChartPoint::over(p, r, 0.5 * PI * j as f64);
                let image = flow.transport(&e, 0.0, 1.0, steps)?;
                separation = separation.min(geom::angle(image.base(), c) - rho);
                count += 1;
            }
        }
    }
    if separation > 0.0 {
        Ok((
            path,
            DisplacementCertificate {
                separation,
                samples: count,
                vacuous: false,
            },
        ))
    } else {
        Err(Error::Certification(separation))
    }
}
