//! Magnetization curves, core loss and the series magnetic-circuit solver.
//!
//! A [`Material`] carries a single-valued B-H curve as ordered knots through
//! the origin. Lookups interpolate piecewise-linearly; above the last knot the
//! curve continues with the free-space slope `μ₀`. Piecewise-linear keeps the
//! curve monotone, which the bisection in
//! [`solve_series_magnetic_circuit`] relies on for a unique root.

use serde::{Deserialize, Serialize};

use crate::curve::CurveSeries;
use crate::error::{from_json_slice, Error, Result};
use crate::MU_0;

/// Schema version of the material library document.
pub const LIBRARY_SCHEMA_VERSION: u32 = 1;

/// Upper flux density used to open the solver bracket, T.
pub const BRACKET_FLUX_DENSITY: f64 = 2.5;

/// Bisection iteration cap.
pub const MAX_BISECTION_STEPS: usize = 200;

/// The knee sits where the incremental permeability of a curve segment first
/// falls below this fraction of the initial permeability.
pub const KNEE_SLOPE_FRACTION: f64 = 0.02;

const BUNDLED_LIBRARY: &str = include_str!("../data/materials.json");

/// Two-term Steinmetz coefficients, `p = k_h·f·B^x + k_e·f²·B²` in W/kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossCoefficients {
    pub k_h: f64,
    pub x: f64,
    pub k_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// kg/m³
    pub density: f64,
    pub stacking_factor: f64,
    pub loss: LossCoefficients,
    /// Knots as (H in A/m, B in T).
    #[serde(rename = "bh")]
    pub bh_points: Vec<(f64, f64)>,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        bh_points: Vec<(f64, f64)>,
        loss: LossCoefficients,
        density: f64,
        stacking_factor: f64,
    ) -> Result<Self> {
        let m = Material {
            name: name.into(),
            description: String::new(),
            density,
            stacking_factor,
            loss,
            bh_points,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |point: Option<usize>, message: String| Error::Material {
            material: self.name.clone(),
            point,
            message,
        };
        if self.name.trim().is_empty() {
            return Err(err(None, "name is empty".into()));
        }
        if self.bh_points.len() < 4 {
            return Err(err(
                None,
                format!("needs at least 4 B-H points, has {}", self.bh_points.len()),
            ));
        }
        if self.bh_points[0] != (0.0, 0.0) {
            return Err(err(Some(0), "first point must be (0, 0)".into()));
        }
        for (i, w) in self.bh_points.windows(2).enumerate() {
            let (h0, b0) = w[0];
            let (h1, b1) = w[1];
            if !h1.is_finite() || !b1.is_finite() {
                return Err(err(Some(i + 1), "non-finite value".into()));
            }
            if h1 <= h0 {
                return Err(err(Some(i + 1), format!("H not strictly increasing ({h1} after {h0})")));
            }
            if b1 <= b0 {
                return Err(err(Some(i + 1), format!("B not strictly increasing ({b1} after {b0})")));
            }
        }
        if !(self.stacking_factor > 0.0 && self.stacking_factor <= 1.0) {
            return Err(err(
                None,
                format!("stacking_factor must lie in (0, 1], got {}", self.stacking_factor),
            ));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(err(None, format!("density must be positive, got {}", self.density)));
        }
        let LossCoefficients { k_h, x, k_e } = self.loss;
        if !(k_h >= 0.0 && x >= 0.0 && k_e >= 0.0) || !(k_h + x + k_e).is_finite() {
            return Err(err(None, "loss coefficients must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Field strength needed for flux density `b`, A/m.
    pub fn h_at(&self, b: f64) -> Result<f64> {
        if !(b >= 0.0) {
            return Err(Error::domain(format!("flux density must be >= 0, got {b}")));
        }
        Ok(self.h_unchecked(b))
    }

    /// Flux density produced by field strength `h`, T.
    pub fn b_at(&self, h: f64) -> Result<f64> {
        if !(h >= 0.0) {
            return Err(Error::domain(format!("field strength must be >= 0, got {h}")));
        }
        Ok(self.b_unchecked(h))
    }

    fn h_unchecked(&self, b: f64) -> f64 {
        let pts = &self.bh_points;
        let (h_last, b_last) = pts[pts.len() - 1];
        if b >= b_last {
            return h_last + (b - b_last) / MU_0;
        }
        // first knot with B > b; b < b_last so it exists and idx >= 1
        let idx = pts.partition_point(|p| p.1 <= b);
        let (h0, b0) = pts[idx - 1];
        let (h1, b1) = pts[idx];
        h0 + (h1 - h0) * (b - b0) / (b1 - b0)
    }

    fn b_unchecked(&self, h: f64) -> f64 {
        let pts = &self.bh_points;
        let (h_last, b_last) = pts[pts.len() - 1];
        if h >= h_last {
            return b_last + MU_0 * (h - h_last);
        }
        let idx = pts.partition_point(|p| p.0 <= h);
        let (h0, b0) = pts[idx - 1];
        let (h1, b1) = pts[idx];
        b0 + (b1 - b0) * (h - h0) / (h1 - h0)
    }

    /// Slope of the first curve segment, H/m.
    pub fn initial_permeability(&self) -> f64 {
        let (h, b) = self.bh_points[1];
        b / h
    }

    pub fn initial_relative_permeability(&self) -> f64 {
        self.initial_permeability() / MU_0
    }

    /// Flux density at the saturation knee.
    pub fn knee_flux_density(&self) -> f64 {
        let threshold = KNEE_SLOPE_FRACTION * self.initial_permeability();
        self.bh_points
            .windows(2)
            .find(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) < threshold)
            .map(|w| w[0].1)
            .unwrap_or(self.bh_points[self.bh_points.len() - 1].1)
    }

    /// Specific core loss in W/kg at peak flux density `b_peak` and frequency `f`.
    pub fn specific_core_loss(&self, b_peak: f64, f: f64) -> Result<f64> {
        if !(b_peak >= 0.0) {
            return Err(Error::domain(format!("peak flux density must be >= 0, got {b_peak}")));
        }
        if !(f > 0.0) {
            return Err(Error::domain(format!("frequency must be > 0, got {f}")));
        }
        let LossCoefficients { k_h, x, k_e } = self.loss;
        Ok(k_h * f * b_peak.powf(x) + k_e * f * f * b_peak * b_peak)
    }

    /// The knots as a plottable series (H → B).
    pub fn bh_curve(&self) -> CurveSeries {
        CurveSeries {
            name: format!("bh_{}", self.name),
            x_label: "H (A/m)".into(),
            y_label: "B (T)".into(),
            points: self.bh_points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialLibrary {
    pub schema_version: u32,
    pub materials: Vec<Material>,
}

impl MaterialLibrary {
    pub fn get(&self, name: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.name == name)
    }

    /// Look up a material, reporting `field` on failure.
    pub fn resolve(&self, field: &str, name: &str) -> Result<&Material> {
        self.get(name).ok_or_else(|| {
            let known: Vec<_> = self.materials.iter().map(|m| m.name.as_str()).collect();
            Error::invalid(field, format!("unknown material `{name}` (library has {known:?})"))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.iter().map(|m| m.name.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("library serializes")
    }
}

/// Parse and validate a material library document.
pub fn load_material_library(source: &[u8]) -> Result<MaterialLibrary> {
    let lib: MaterialLibrary = from_json_slice(source)?;
    if lib.schema_version != LIBRARY_SCHEMA_VERSION {
        return Err(Error::invalid(
            "schema_version",
            format!(
                "unsupported version {}, expected {LIBRARY_SCHEMA_VERSION}",
                lib.schema_version
            ),
        ));
    }
    if lib.materials.is_empty() {
        return Err(Error::invalid("materials", "library contains no materials"));
    }
    for (i, m) in lib.materials.iter().enumerate() {
        m.validate()?;
        if lib.materials[..i].iter().any(|o| o.name == m.name) {
            return Err(Error::invalid(
                format!("materials[{i}].name"),
                format!("duplicate material `{}`", m.name),
            ));
        }
    }
    Ok(lib)
}

/// The steels shipped with the engine.
pub fn bundled_library() -> MaterialLibrary {
    load_material_library(BUNDLED_LIBRARY.as_bytes()).expect("bundled library is valid")
}

/// What a circuit segment is made of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium<'m> {
    /// Nonlinear iron following the material's B-H curve.
    Iron(&'m Material),
    /// Iron held at a constant relative permeability.
    LinearIron {
        relative_permeability: f64,
    },
    AirGap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSegment<'m> {
    /// m
    pub length: f64,
    /// m²
    pub area: f64,
    pub medium: Medium<'m>,
}

impl<'m> CircuitSegment<'m> {
    pub fn new(length: f64, area: f64, medium: Medium<'m>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain(format!("segment length must be > 0, got {length}")));
        }
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::domain(format!("segment area must be > 0, got {area}")));
        }
        if let Medium::LinearIron { relative_permeability } = medium {
            if !(relative_permeability >= 1.0 && relative_permeability.is_finite()) {
                return Err(Error::domain(format!(
                    "relative permeability must be >= 1, got {relative_permeability}"
                )));
            }
        }
        Ok(CircuitSegment { length, area, medium })
    }

    pub fn iron(length: f64, area: f64, material: &'m Material) -> Result<Self> {
        Self::new(length, area, Medium::Iron(material))
    }

    pub fn air(length: f64, area: f64) -> Result<Self> {
        Self::new(length, area, Medium::AirGap)
    }

    pub fn is_air(&self) -> bool {
        matches!(self.medium, Medium::AirGap)
    }

    /// MMF drop across the segment when it carries `flux`.
    pub fn mmf_drop(&self, flux: f64) -> f64 {
        let b = flux / self.area;
        let h = match self.medium {
            Medium::Iron(m) => m.h_unchecked(b),
            Medium::LinearIron { relative_permeability } => b / (MU_0 * relative_permeability),
            Medium::AirGap => b / MU_0,
        };
        h * self.length
    }

    /// Reluctance when the medium is linear, At/Wb.
    pub fn linear_reluctance(&self) -> Option<f64> {
        match self.medium {
            Medium::Iron(_) => None,
            Medium::LinearIron { relative_permeability } => {
                Some(self.length / (MU_0 * relative_permeability * self.area))
            }
            Medium::AirGap => Some(self.length / (MU_0 * self.area)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSolution {
    /// Wb
    pub flux: f64,
    /// Per-segment flux density, T, in segment order.
    pub flux_density: Vec<f64>,
    /// Per-segment MMF drop, At, in segment order.
    pub mmf_drop: Vec<f64>,
}

impl CircuitSolution {
    /// Secant reluctance `Σ drop / φ`, At/Wb. Undefined at zero flux.
    pub fn reluctance(&self) -> Option<f64> {
        (self.flux > 0.0).then(|| self.mmf_drop.iter().sum::<f64>() / self.flux)
    }
}

/// Total MMF needed to push `flux` through the series chain.
pub fn total_mmf_drop(segments: &[CircuitSegment<'_>], flux: f64) -> f64 {
    segments.iter().map(|s| s.mmf_drop(flux)).sum()
}

/// Find the flux in a series magnetic circuit driven by `applied_mmf`.
///
/// The total drop is continuous and strictly increasing in flux, so the root
/// is unique; it is bracketed in `[0, 2.5 T · min(area)]` and found by
/// bisection down to floating-point resolution.
pub fn solve_series_magnetic_circuit(segments: &[CircuitSegment<'_>], applied_mmf: f64) -> Result<CircuitSolution> {
    if segments.is_empty() {
        return Err(Error::domain("magnetic circuit has no segments"));
    }
    if !(applied_mmf >= 0.0) || !applied_mmf.is_finite() {
        return Err(Error::domain(format!("applied MMF must be >= 0, got {applied_mmf}")));
    }
    let flux = if applied_mmf == 0.0 {
        0.0
    } else {
        bisect_flux(segments, applied_mmf)?
    };
    Ok(CircuitSolution {
        flux,
        flux_density: segments.iter().map(|s| flux / s.area).collect(),
        mmf_drop: segments.iter().map(|s| s.mmf_drop(flux)).collect(),
    })
}

fn bisect_flux(segments: &[CircuitSegment<'_>], mmf: f64) -> Result<f64> {
    let min_area = segments.iter().map(|s| s.area).fold(f64::INFINITY, f64::min);
    let mut lo = 0.0_f64;
    let mut hi = BRACKET_FLUX_DENSITY * min_area;
    // Airgap-dominated circuits can exceed 2.5 T at high MMF; grow the bracket.
    let mut grow = 0;
    while total_mmf_drop(segments, hi) < mmf {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 64 || !hi.is_finite() {
            return Err(Error::Solver {
                lo,
                hi,
                message: format!("could not bracket MMF {mmf} At"),
            });
        }
    }
    let tol = 1e-9 * mmf.max(1.0);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = total_mmf_drop(segments, mid) - mmf;
        if r == 0.0 {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_lo = (total_mmf_drop(segments, lo) - mmf).abs();
    let r_hi = (total_mmf_drop(segments, hi) - mmf).abs();
    let (best, resid) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if resid <= tol {
        Ok(best)
    } else {
        Err(Error::Solver {
            lo,
            hi,
            message: format!("residual {resid:e} At above tolerance {tol:e}"),
        })
    }
}
