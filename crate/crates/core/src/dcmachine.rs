//! DC machine synthesis: main dimensions, armature winding and the EMF
//! check closing the design loop.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::materials::Material;
use crate::sizing::{
    self, check_poles, separate_main_dimensions, validate_policy, Loadings, MainDimensions, ShapePolicy,
};

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winding {
    Lap,
    Wave,
}

impl Winding {
    pub fn parallel_paths(self, poles: u32) -> u32 {
        match self {
            Winding::Lap => poles,
            Winding::Wave => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DCSpec {
    pub power_kw: f64,
    pub voltage: f64,
    pub speed_rpm: f64,
    pub poles: u32,
    pub winding: Winding,
    pub material: String,
}

impl DCSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("power_kw", self.power_kw)?;
        require_positive("voltage", self.voltage)?;
        require_positive("speed_rpm", self.speed_rpm)?;
        if check_poles(self.poles).is_err() {
            return Err(Error::invalid(
                "poles",
                format!("must be even and >= 2, got {}", self.poles),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DCLimits {
    pub b_av_max: f64,
    pub ac_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DCConstants {
    pub schema_version: u32,
    pub b_av: f64,
    pub ac: f64,
    pub shape: ShapePolicy,
    /// Preferred armature slot pitch, m.
    pub target_slot_pitch: f64,
    /// A/mm²
    pub current_density: f64,
    pub limits: DCLimits,
}

impl Default for DCConstants {
    fn default() -> Self {
        DCConstants {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            b_av: 0.5,
            ac: 25000.0,
            shape: ShapePolicy::Ratio { l_over_tau: 0.7 },
            target_slot_pitch: 0.025,
            current_density: 4.5,
            limits: DCLimits {
                b_av_max: 0.9,
                ac_max: 50000.0,
            },
        }
    }
}

impl DCConstants {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONSTANTS_SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        for (f, v) in [
            ("b_av", self.b_av),
            ("ac", self.ac),
            ("target_slot_pitch", self.target_slot_pitch),
            ("current_density", self.current_density),
            ("limits.b_av_max", self.limits.b_av_max),
            ("limits.ac_max", self.limits.ac_max),
        ] {
            require_positive(f, v)?;
        }
        validate_policy("shape", &self.shape)
    }

    /// `C₀ = π²·B_av·ac·10⁻³`, kW per m³·rps.
    pub fn output_coefficient_rps(&self) -> f64 {
        PI * PI * self.b_av * self.ac * 1e-3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DCDesign {
    /// `P/(D²·L·N)`, kW per m³·rpm.
    pub output_coefficient: f64,
    pub main: MainDimensions,
    pub design_loadings: Loadings,
    /// Magnetic loading at the design flux and electric loading realized
    /// by the integer winding.
    pub loadings: Loadings,
    pub pole_pitch: f64,
    pub flux_per_pole: f64,
    pub armature_conductors: u32,
    pub parallel_paths: u32,
    pub slots: u32,
    pub conductors_per_slot: u32,
    pub armature_current: f64,
    pub conductor_current: f64,
    pub conductor_area: f64,
    pub emf_check: f64,
    /// EMF contributed by a single conductor, V.
    pub emf_per_conductor: f64,
}

/// `E = φ·Z·N·p/(60·a)`.
pub fn armature_emf(
    flux_per_pole: f64,
    conductors: u32,
    speed_rpm: f64,
    poles: u32,
    parallel_paths: u32,
) -> Result<f64> {
    if !(flux_per_pole > 0.0 && speed_rpm > 0.0 && flux_per_pole.is_finite() && speed_rpm.is_finite()) {
        return Err(Error::domain("flux and speed must be > 0"));
    }
    if conductors == 0 || poles == 0 || parallel_paths == 0 {
        return Err(Error::domain("conductors, poles and parallel paths must be > 0"));
    }
    Ok(flux_per_pole * conductors as f64 * speed_rpm * poles as f64 / (60.0 * parallel_paths as f64))
}

/// Slot count dividing `half_z` closest to `target` (ties to the smaller).
/// When no divisor lies within a factor of two of the target, every slot
/// holds a single two-conductor coil instead.
fn pick_slots(half_z: u32, target: f64) -> u32 {
    let mut best = half_z;
    let mut best_err = f64::INFINITY;
    for s in 1..=half_z {
        if half_z.is_multiple_of(s) {
            let err = (s as f64 - target).abs();
            if err < best_err {
                best = s;
                best_err = err;
            }
        }
    }
    if (best as f64) < 0.5 * target || (best as f64) > 2.0 * target {
        return half_z;
    }
    best
}

pub fn design_dc(spec: &DCSpec, constants: &DCConstants, _material: &Material) -> Result<DCDesign> {
    spec.validate()?;
    constants.validate()?;
    let c = constants;
    let p = spec.poles;

    let design_loadings = Loadings::new(c.b_av, c.ac)?;
    check_limits(&design_loadings, &c.limits)?;
    let main = separate_main_dimensions(
        spec.power_kw / (c.output_coefficient_rps() * spec.speed_rpm / 60.0),
        c.shape,
        p,
    )?;
    let (d, l) = (main.d, main.l);
    let flux = sizing::flux_per_pole(p, c.b_av, d, l)?;

    let a = spec.winding.parallel_paths(p);
    let i_a = spec.power_kw * 1e3 / spec.voltage;
    let z_target = 60.0 * a as f64 * spec.voltage / (flux * spec.speed_rpm * p as f64);
    let z = ((z_target / 2.0).round() as u32).max(1) * 2;
    let slots = pick_slots(z / 2, PI * d / c.target_slot_pitch);
    let i_z = i_a / a as f64;
    let loadings = Loadings::new(c.b_av, sizing::specific_electric_loading(i_z * z as f64, d)?)?;
    check_limits(&loadings, &c.limits)?;

    Ok(DCDesign {
        output_coefficient: sizing::output_coefficient(spec.power_kw, d, l, spec.speed_rpm)?,
        main,
        design_loadings,
        loadings,
        pole_pitch: main.pole_pitch(p),
        flux_per_pole: flux,
        armature_conductors: z,
        parallel_paths: a,
        slots,
        conductors_per_slot: z / slots,
        armature_current: i_a,
        conductor_current: i_z,
        conductor_area: i_z / (c.current_density * 1e6),
        emf_check: armature_emf(flux, z, spec.speed_rpm, p, a)?,
        emf_per_conductor: armature_emf(flux, 1, spec.speed_rpm, p, a)?,
    })
}

fn check_limits(l: &Loadings, limits: &DCLimits) -> Result<()> {
    if l.b_av > limits.b_av_max {
        return Err(Error::infeasible(
            "b_av <= limits.b_av_max",
            format!("magnetic loading {} above {}", l.b_av, limits.b_av_max),
        ));
    }
    if l.ac > limits.ac_max {
        return Err(Error::infeasible(
            "ac <= limits.ac_max",
            format!("electric loading {:.0} A/m above {}", l.ac, limits.ac_max),
        ));
    }
    Ok(())
}
