//! Rotary switched reluctance motor: sizing, aligned and unaligned
//! inductance from magnetic circuits, the trapezoidal inductance profile,
//! average torque and pole-arc refinement advice.
//!
//! Angles are mechanical radians. Inductances are per phase. A phase has
//! `n_s/m` poles; each pair of opposite-polarity poles forms one flux loop,
//! and every circuit below is the half loop belonging to a single pole.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{linspace, CurveSeries};
use crate::error::{require_fraction, require_positive, Error, Result};
use crate::materials::{solve_series_magnetic_circuit, CircuitSegment, Material, Medium};

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

/// Bound strings of the feasibility triangle, as reported in errors.
pub const BOUND_ARC_ORDER: &str = "beta_s <= beta_r";
pub const BOUND_SELF_START: &str = "beta_s >= 2π/(m·n_r)";
pub const BOUND_ARC_SUM: &str = "beta_s + beta_r < 2π/n_r";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    PowerKw(f64),
    TorqueNm(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SRMSpec {
    pub target: Target,
    pub speed_rpm: f64,
    pub dc_voltage: f64,
    pub phases: u32,
    pub stator_poles: u32,
    pub rotor_poles: u32,
    pub beta_s: f64,
    pub beta_r: f64,
    pub air_gap: f64,
    pub peak_current: f64,
    pub material: String,
}

impl SRMSpec {
    pub fn validate(&self) -> Result<()> {
        match self.target {
            Target::PowerKw(p) => require_positive("target.power_kw", p)?,
            Target::TorqueNm(t) => require_positive("target.torque_nm", t)?,
        }
        require_positive("speed_rpm", self.speed_rpm)?;
        require_positive("dc_voltage", self.dc_voltage)?;
        require_positive("beta_s", self.beta_s)?;
        require_positive("beta_r", self.beta_r)?;
        require_positive("air_gap", self.air_gap)?;
        require_positive("peak_current", self.peak_current)?;
        if self.phases < 2 {
            return Err(Error::invalid("phases", "at least 2 phases are needed to self-start"));
        }
        if !self.stator_poles.is_multiple_of(2) || self.stator_poles == 0 {
            return Err(Error::invalid("stator_poles", "must be even and > 0"));
        }
        if !self.rotor_poles.is_multiple_of(2) || self.rotor_poles == 0 {
            return Err(Error::invalid("rotor_poles", "must be even and > 0"));
        }
        if self.stator_poles <= self.rotor_poles {
            return Err(Error::invalid("stator_poles", "must exceed rotor_poles"));
        }
        if !self.stator_poles.is_multiple_of(self.phases) || !(self.stator_poles / self.phases).is_multiple_of(2) {
            return Err(Error::invalid(
                "stator_poles",
                format!(
                    "{} poles do not give an even pole count per phase for {} phases",
                    self.stator_poles, self.phases
                ),
            ));
        }
        Ok(())
    }

    pub fn poles_per_phase(&self) -> u32 {
        self.stator_poles / self.phases
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.speed_rpm / 60.0
    }

    pub fn target_torque(&self) -> f64 {
        match self.target {
            Target::TorqueNm(t) => t,
            Target::PowerKw(p) => p * 1e3 / self.omega(),
        }
    }

    pub fn target_power_kw(&self) -> f64 {
        match self.target {
            Target::PowerKw(p) => p,
            Target::TorqueNm(t) => t * self.omega() * 1e-3,
        }
    }
}

/// Check the pole-arc feasibility triangle.
pub fn check_feasibility(phases: u32, rotor_poles: u32, beta_s: f64, beta_r: f64) -> Result<()> {
    let pitch = 2.0 * PI / rotor_poles as f64;
    if beta_s > beta_r {
        return Err(Error::infeasible(
            BOUND_ARC_ORDER,
            format!("stator arc {beta_s:.5} rad wider than rotor arc {beta_r:.5} rad"),
        ));
    }
    let min_s = pitch / phases as f64;
    if beta_s < min_s * (1.0 - 1e-12) {
        return Err(Error::infeasible(
            BOUND_SELF_START,
            format!("stator arc {beta_s:.5} rad below the stroke angle {min_s:.5} rad; rotor cannot self-start"),
        ));
    }
    if beta_s + beta_r >= pitch {
        return Err(Error::infeasible(
            BOUND_ARC_SUM,
            format!(
                "arcs sum to {:.5} rad, rotor pole pitch is {pitch:.5} rad",
                beta_s + beta_r
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// Stator pole face straight down into the rotor interpolar space.
    FaceToSlotBottom,
    /// Outer parts of the pole face arcing to the nearest rotor pole corners.
    TipToRotorCorner,
    /// Lower stator pole side to the rotor pole side.
    SideToRotorSide,
    /// Upper stator pole side to the rotor pole face.
    SideToRotorFace,
    /// Across the stator slot to the neighbouring stator pole.
    StatorInterpole,
    /// Stator pole side arcing into the stator back iron.
    SideToYoke,
    /// Fringing at the stack ends.
    EndFringe,
}

impl PathKind {
    fn reaches_rotor_pole(self) -> bool {
        matches!(
            self,
            PathKind::TipToRotorCorner | PathKind::SideToRotorSide | PathKind::SideToRotorFace
        )
    }

    fn reaches_rotor(self) -> bool {
        self.reaches_rotor_pole() || self == PathKind::FaceToSlotBottom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub kind: PathKind,
    /// Share of the phase turns the path links.
    pub enclosure_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SRMConstants {
    pub schema_version: u32,
    pub efficiency: f64,
    pub duty_cycle: f64,
    /// `1 − lu/la` at rated current.
    pub inductance_ratio_factor: f64,
    /// Stator pole flux density at alignment, T.
    pub pole_flux_density: f64,
    /// A/m
    pub specific_electric_loading: f64,
    /// Stack length over bore diameter.
    pub length_to_bore: f64,
    /// Back iron over pole width, at least 0.5.
    pub back_iron_factor: f64,
    /// A/mm²
    pub current_density: f64,
    pub fill_factor: f64,
    /// Share of half the interpolar width one coil side may occupy.
    pub coil_width_fraction: f64,
    /// Coil height over stator pole height.
    pub coil_height_fraction: f64,
    /// Rotor pole height over bore radius.
    pub rotor_pole_height_fraction: f64,
    pub flux_paths: Vec<PathSpec>,
    pub profile_points: usize,
    /// |torque_gap| below this share of the target counts as achieved.
    pub torque_tolerance: f64,
    /// Relative pole-arc step proposed by the refinement advice.
    pub arc_step: f64,
    /// Clearance kept below the arc-sum bound, rad.
    pub arc_margin: f64,
}

impl Default for SRMConstants {
    fn default() -> Self {
        let path = |kind, enclosure_fraction| PathSpec {
            kind,
            enclosure_fraction,
        };
        SRMConstants {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            efficiency: 0.85,
            duty_cycle: 1.0,
            inductance_ratio_factor: 0.7,
            pole_flux_density: 1.7,
            specific_electric_loading: 40000.0,
            length_to_bore: 1.0,
            back_iron_factor: 0.6,
            current_density: 6.0,
            fill_factor: 0.4,
            coil_width_fraction: 0.9,
            coil_height_fraction: 0.85,
            rotor_pole_height_fraction: 0.2,
            flux_paths: vec![
                path(PathKind::FaceToSlotBottom, 1.0),
                path(PathKind::TipToRotorCorner, 1.0),
                path(PathKind::SideToRotorSide, 1.0),
                path(PathKind::SideToRotorFace, 0.5),
                path(PathKind::StatorInterpole, 0.5),
                path(PathKind::SideToYoke, 0.25),
                path(PathKind::EndFringe, 0.25),
            ],
            profile_points: 181,
            torque_tolerance: 0.02,
            arc_step: 0.1,
            arc_margin: 1e-3,
        }
    }
}

impl SRMConstants {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONSTANTS_SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        for (f, v) in [
            ("pole_flux_density", self.pole_flux_density),
            ("specific_electric_loading", self.specific_electric_loading),
            ("length_to_bore", self.length_to_bore),
            ("current_density", self.current_density),
            ("rotor_pole_height_fraction", self.rotor_pole_height_fraction),
            ("torque_tolerance", self.torque_tolerance),
            ("arc_step", self.arc_step),
            ("arc_margin", self.arc_margin),
        ] {
            require_positive(f, v)?;
        }
        for (f, v) in [
            ("efficiency", self.efficiency),
            ("duty_cycle", self.duty_cycle),
            ("inductance_ratio_factor", self.inductance_ratio_factor),
            ("coil_width_fraction", self.coil_width_fraction),
            ("coil_height_fraction", self.coil_height_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(f, format!("must lie in (0, 1], got {v}")));
            }
        }
        require_fraction("fill_factor", self.fill_factor)?;
        if !(self.back_iron_factor >= 0.5 && self.back_iron_factor.is_finite()) {
            return Err(Error::invalid("back_iron_factor", "must be >= 0.5 for flux continuity"));
        }
        if self.flux_paths.is_empty() {
            return Err(Error::invalid("flux_paths", "needs at least one path"));
        }
        for (i, p) in self.flux_paths.iter().enumerate() {
            if !(p.enclosure_fraction > 0.0 && p.enclosure_fraction <= 1.0) {
                return Err(Error::invalid(
                    format!("flux_paths.{i}.enclosure_fraction"),
                    "must lie in (0, 1]",
                ));
            }
        }
        if self.profile_points < 3 {
            return Err(Error::invalid("profile_points", "must be >= 3"));
        }
        Ok(())
    }

    /// kW per m³·rpm.
    pub fn output_coefficient(&self) -> f64 {
        self.efficiency
            * self.duty_cycle
            * (PI * PI / 120.0)
            * self.inductance_ratio_factor
            * self.pole_flux_density
            * self.specific_electric_loading
            * 1e-3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SRMGeometry {
    pub bore_diameter: f64,
    pub stack_length: f64,
    pub air_gap: f64,
    pub stator_pole_height: f64,
    pub rotor_pole_height: f64,
    pub stator_back_iron: f64,
    pub rotor_back_iron: f64,
    pub stator_pole_width: f64,
    pub rotor_pole_width: f64,
    pub shaft_diameter: f64,
    pub outer_diameter: f64,
    pub turns_per_phase: u32,
    pub conductor_area: f64,
}

impl SRMGeometry {
    fn bore_radius(&self) -> f64 {
        0.5 * self.bore_diameter
    }

    /// Mean diameter of the stator back iron.
    fn stator_yoke_diameter(&self) -> f64 {
        self.outer_diameter - self.stator_back_iron
    }

    /// Mean diameter of the rotor back iron.
    fn rotor_yoke_diameter(&self) -> f64 {
        self.shaft_diameter + self.rotor_back_iron
    }
}

/// `t = 2·r·sin(β/2)`, chord width of a pole of arc `beta` at radius `r`.
pub fn pole_width(diameter: f64, beta: f64) -> f64 {
    diameter * (0.5 * beta).sin()
}

pub fn size_srm(spec: &SRMSpec, constants: &SRMConstants) -> Result<SRMGeometry> {
    spec.validate()?;
    constants.validate()?;
    check_feasibility(spec.phases, spec.rotor_poles, spec.beta_s, spec.beta_r)?;
    let c = constants;
    let g = spec.air_gap;

    let d2l = spec.target_power_kw() / (c.output_coefficient() * spec.speed_rpm);
    let d = (d2l / c.length_to_bore).cbrt();
    let l = c.length_to_bore * d;
    let r = 0.5 * d;
    let t_s = pole_width(d, spec.beta_s);
    let t_r = pole_width(d - 2.0 * g, spec.beta_r);
    let b_sy = c.back_iron_factor * t_s;
    let b_ry = c.back_iron_factor * t_r.max(t_s);

    // flux linkage V·β_s/ω reached at the design pole flux density
    let ppp = spec.poles_per_phase();
    let turns_raw = spec.dc_voltage / (spec.omega() * c.pole_flux_density * r * l);
    let turns = ((turns_raw / ppp as f64).round() as u32).max(1) * ppp;

    let i_rms = spec.peak_current / (spec.phases as f64).sqrt();
    let a_c = i_rms / (c.current_density * 1e6);
    let coil_area = (turns / ppp) as f64 * a_c / c.fill_factor;
    let interpolar = PI * d / spec.stator_poles as f64 - t_s;
    let coil_width = 0.5 * interpolar * c.coil_width_fraction;
    if !(coil_width > 0.0) {
        return Err(Error::infeasible(
            "stator winding window > 0",
            format!("no room between stator poles at {d:.4} m bore; use a larger bore or narrower stator arc"),
        ));
    }
    let h_s = coil_area / coil_width / c.coil_height_fraction;
    let h_r = c.rotor_pole_height_fraction * r;
    let shaft = d - 2.0 * (g + h_r + b_ry);
    if !(shaft > 0.0) {
        return Err(Error::infeasible(
            "shaft_diameter > 0",
            format!("rotor poles and back iron leave no shaft ({shaft:.4} m); use a larger bore"),
        ));
    }

    Ok(SRMGeometry {
        bore_diameter: d,
        stack_length: l,
        air_gap: g,
        stator_pole_height: h_s,
        rotor_pole_height: h_r,
        stator_back_iron: b_sy,
        rotor_back_iron: b_ry,
        stator_pole_width: t_s,
        rotor_pole_width: t_r,
        shaft_diameter: shaft,
        outer_diameter: d + 2.0 * (h_s + b_sy),
        turns_per_phase: turns,
        conductor_area: a_c,
    })
}

/// One segment of a reported flux path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSegment {
    pub part: String,
    /// `air`, `iron` or `linear_iron`.
    pub medium: String,
    pub length: f64,
    pub area: f64,
    pub flux_density: f64,
    pub mmf_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxPath {
    pub index: usize,
    pub name: String,
    pub segments: Vec<PathSegment>,
    /// Air-gap flux density of the solved path, T.
    pub solved_b: f64,
    /// Phase-equivalent reluctance, At/Wb: `turns²/L` for a fully
    /// enclosed path.
    pub reluctance: f64,
    pub enclosure_fraction: f64,
    pub inductance_contribution: f64,
}

struct Chain<'m> {
    parts: Vec<&'static str>,
    segments: Vec<CircuitSegment<'m>>,
}

impl<'m> Chain<'m> {
    fn new() -> Self {
        Chain {
            parts: Vec::new(),
            segments: Vec::new(),
        }
    }

    fn push(&mut self, part: &'static str, length: f64, area: f64, medium: Medium<'m>) -> Result<()> {
        self.parts.push(part);
        self.segments.push(CircuitSegment::new(length, area, medium)?);
        Ok(())
    }

    /// Stator pole and half the stator back iron between same-phase poles.
    fn stator_iron(&mut self, geom: &SRMGeometry, ppp: u32, sf: f64, medium: Medium<'m>) -> Result<()> {
        let l = geom.stack_length;
        self.push(
            "stator pole",
            geom.stator_pole_height,
            geom.stator_pole_width * l * sf,
            medium,
        )?;
        self.push(
            "stator back iron",
            PI * geom.stator_yoke_diameter() / (2.0 * ppp as f64),
            2.0 * geom.stator_back_iron * l * sf,
            medium,
        )
    }

    fn rotor_yoke(&mut self, geom: &SRMGeometry, ppp: u32, sf: f64, medium: Medium<'m>) -> Result<()> {
        self.push(
            "rotor back iron",
            PI * geom.rotor_yoke_diameter() / (2.0 * ppp as f64),
            2.0 * geom.rotor_back_iron * geom.stack_length * sf,
            medium,
        )
    }

    fn report(&self, flux: f64) -> Vec<PathSegment> {
        self.parts
            .iter()
            .zip(&self.segments)
            .map(|(part, s)| PathSegment {
                part: part.to_string(),
                medium: match s.medium {
                    Medium::AirGap => "air",
                    Medium::Iron(_) => "iron",
                    Medium::LinearIron { .. } => "linear_iron",
                }
                .to_string(),
                length: s.length,
                area: s.area,
                flux_density: flux / s.area,
                mmf_drop: s.mmf_drop(flux),
            })
            .collect()
    }

    fn air_flux_density(&self, flux: f64) -> f64 {
        self.segments.iter().find(|s| s.is_air()).map_or(0.0, |s| flux / s.area)
    }
}

fn check_geometry(geom: &SRMGeometry) -> Result<()> {
    for (f, v) in [
        ("bore_diameter", geom.bore_diameter),
        ("stack_length", geom.stack_length),
        ("air_gap", geom.air_gap),
        ("stator_pole_height", geom.stator_pole_height),
        ("rotor_pole_height", geom.rotor_pole_height),
        ("stator_back_iron", geom.stator_back_iron),
        ("rotor_back_iron", geom.rotor_back_iron),
        ("stator_pole_width", geom.stator_pole_width),
        ("rotor_pole_width", geom.rotor_pole_width),
        ("shaft_diameter", geom.shaft_diameter),
        ("outer_diameter", geom.outer_diameter),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("geometry {f} must be > 0, got {v}")));
        }
    }
    if geom.turns_per_phase == 0 {
        return Err(Error::domain("geometry needs at least one turn per phase"));
    }
    Ok(())
}

/// Aligned inductance at `current` from the nonlinear half-loop circuit
/// (stator pole, gap, rotor pole, half of each back iron) driven by one
/// pole's ampere-turns.
pub fn aligned_inductance(
    spec: &SRMSpec,
    geom: &SRMGeometry,
    current: f64,
    material: &Material,
) -> Result<(f64, FluxPath)> {
    check_geometry(geom)?;
    if !(current > 0.0 && current.is_finite()) {
        return Err(Error::domain(format!("current must be > 0, got {current}")));
    }
    let ppp = spec.poles_per_phase();
    let sf = material.stacking_factor;
    let l = geom.stack_length;
    let iron = Medium::Iron(material);
    let overlap = geom.bore_radius() * spec.beta_s.min(spec.beta_r) * l;

    let mut chain = Chain::new();
    chain.push(
        "stator pole",
        geom.stator_pole_height,
        geom.stator_pole_width * l * sf,
        iron,
    )?;
    chain.push("air gap", geom.air_gap, overlap, Medium::AirGap)?;
    chain.push(
        "rotor pole",
        geom.rotor_pole_height,
        geom.rotor_pole_width * l * sf,
        iron,
    )?;
    chain.rotor_yoke(geom, ppp, sf, iron)?;
    chain.push(
        "stator back iron",
        PI * geom.stator_yoke_diameter() / (2.0 * ppp as f64),
        2.0 * geom.stator_back_iron * l * sf,
        iron,
    )?;

    let turns = geom.turns_per_phase as f64;
    let pole_turns = turns / ppp as f64;
    let sol = solve_series_magnetic_circuit(&chain.segments, pole_turns * current)?;
    let la = turns * sol.flux / current;
    let path = FluxPath {
        index: 0,
        name: "aligned main path".into(),
        segments: chain.report(sol.flux),
        solved_b: chain.air_flux_density(sol.flux),
        reluctance: turns * turns / la,
        enclosure_fraction: 1.0,
        inductance_contribution: la,
    };
    Ok((la, path))
}

/// Air part of an unaligned path: (length, area) of one crossing.
fn path_air(kind: PathKind, spec: &SRMSpec, geom: &SRMGeometry) -> (f64, f64) {
    let g = geom.air_gap;
    let r = geom.bore_radius();
    let l = geom.stack_length;
    let h_r = geom.rotor_pole_height;
    let h_s = geom.stator_pole_height;
    let face = r * spec.beta_s;
    let clearance = unaligned_clearance(spec, geom);
    let slot = PI * geom.bore_diameter / spec.stator_poles as f64 - geom.stator_pole_width;
    match kind {
        PathKind::FaceToSlotBottom => (g + h_r, 0.5 * face * l),
        PathKind::TipToRotorCorner => (g + 0.5 * PI * clearance, 0.5 * face * l),
        PathKind::SideToRotorSide => (g + clearance + 0.25 * PI * h_r, 0.5 * h_r * l),
        PathKind::SideToRotorFace => (g + 0.5 * PI * (clearance + 0.25 * h_s), 0.25 * h_s * l),
        PathKind::StatorInterpole => (slot, 0.5 * h_s * l),
        PathKind::SideToYoke => (0.25 * PI * slot, 0.25 * h_s * l),
        PathKind::EndFringe => (
            0.5 * PI * (g + 0.25 * geom.stator_pole_width),
            face * geom.stator_pole_width,
        ),
    }
}

/// Tangential distance between a stator pole tip and the nearest rotor
/// pole tip at the unaligned position.
fn unaligned_clearance(spec: &SRMSpec, geom: &SRMGeometry) -> f64 {
    geom.bore_radius() * (2.0 * PI / spec.rotor_poles as f64 - spec.beta_r - spec.beta_s) / 2.0
}

/// Unaligned inductance as the sum of the constants' flux paths, iron
/// held at its initial permeability.
pub fn unaligned_inductance(
    spec: &SRMSpec,
    geom: &SRMGeometry,
    constants: &SRMConstants,
    material: &Material,
) -> Result<(f64, Vec<FluxPath>)> {
    check_geometry(geom)?;
    if !(unaligned_clearance(spec, geom) > 0.0) {
        return Err(Error::domain(
            "stator and rotor poles overlap at the unaligned position",
        ));
    }
    let ppp = spec.poles_per_phase();
    let sf = material.stacking_factor;
    let linear = Medium::LinearIron {
        relative_permeability: material.initial_relative_permeability(),
    };
    let turns = geom.turns_per_phase as f64;
    let mut paths = Vec::with_capacity(constants.flux_paths.len());
    for (i, ps) in constants.flux_paths.iter().enumerate() {
        let mut chain = Chain::new();
        chain.stator_iron(geom, ppp, sf, linear)?;
        let (len, area) = path_air(ps.kind, spec, geom);
        chain.push("air", len, area, Medium::AirGap)?;
        if ps.kind.reaches_rotor_pole() {
            chain.push(
                "rotor pole",
                geom.rotor_pole_height,
                geom.rotor_pole_width * geom.stack_length * sf,
                linear,
            )?;
        }
        if ps.kind.reaches_rotor() {
            chain.rotor_yoke(geom, ppp, sf, linear)?;
        }
        let half: f64 = chain
            .segments
            .iter()
            .map(|s| s.linear_reluctance().expect("linear chain"))
            .sum();
        let reluctance = ppp as f64 * half;
        let contribution = ps.enclosure_fraction * turns * turns / reluctance;
        // flux at peak current, for the reported densities
        let flux = turns / ppp as f64 * spec.peak_current * ps.enclosure_fraction / half;
        paths.push(FluxPath {
            index: i + 1,
            name: serde_json::to_value(ps.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            segments: chain.report(flux),
            solved_b: chain.air_flux_density(flux),
            reluctance,
            enclosure_fraction: ps.enclosure_fraction,
            inductance_contribution: contribution,
        });
    }
    let lu = paths.iter().map(|p| p.inductance_contribution).sum();
    Ok((lu, paths))
}

/// Region boundary angles within one rotor pole pitch, measured from the
/// unaligned position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRegions {
    pub rise_start: f64,
    pub dwell_start: f64,
    pub aligned: f64,
    pub dwell_end: f64,
    pub fall_end: f64,
    pub period: f64,
}

pub fn profile_regions(beta_s: f64, beta_r: f64, rotor_poles: u32) -> ProfileRegions {
    let aligned = PI / rotor_poles as f64;
    let outer = 0.5 * (beta_r + beta_s);
    let inner = 0.5 * (beta_r - beta_s);
    ProfileRegions {
        rise_start: aligned - outer,
        dwell_start: aligned - inner,
        aligned,
        dwell_end: aligned + inner,
        fall_end: aligned + outer,
        period: 2.0 * aligned,
    }
}

/// Idealized inductance at rotor angle `theta` in `[0, 2π/n_r]`.
fn profile_value(la: f64, lu: f64, r: &ProfileRegions, beta_s: f64, theta: f64) -> f64 {
    if theta <= r.rise_start || theta >= r.fall_end {
        lu
    } else if theta >= r.dwell_start && theta <= r.dwell_end {
        la
    } else if theta < r.dwell_start {
        lu + (la - lu) * ((theta - r.rise_start) / beta_s).clamp(0.0, 1.0)
    } else {
        lu + (la - lu) * ((r.fall_end - theta) / beta_s).clamp(0.0, 1.0)
    }
}

/// Four-region trapezoidal profile on `theta_grid`.
pub fn inductance_profile(
    la: f64,
    lu: f64,
    beta_s: f64,
    beta_r: f64,
    rotor_poles: u32,
    theta_grid: &[f64],
) -> Result<CurveSeries> {
    if rotor_poles == 0 || !(beta_s > 0.0 && beta_r >= beta_s) {
        return Err(Error::domain("profile needs rotor poles and 0 < beta_s <= beta_r"));
    }
    let period = 2.0 * PI / rotor_poles as f64;
    if let Some(t) = theta_grid.iter().find(|&&t| !(t >= 0.0 && t <= period * (1.0 + 1e-12))) {
        return Err(Error::domain(format!(
            "angle {t} outside one rotor pole pitch [0, {period}]"
        )));
    }
    let regions = profile_regions(beta_s, beta_r, rotor_poles);
    CurveSeries::sample(
        "inductance_profile",
        "rotor angle (rad)",
        "phase inductance (H)",
        theta_grid,
        |t| Ok(profile_value(la, lu, &regions, beta_s, t)),
    )
}

/// Uniform grid on `[start, end]` with the `extra` angles inserted.
pub fn profile_grid(start: f64, end: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let mut grid = linspace(start, end, n);
    grid.extend(extra.iter().copied().filter(|&t| t > start && t < end));
    grid.sort_by(f64::total_cmp);
    let tol = 1e-12 * (end - start);
    grid.dedup_by(|a, b| (*a - *b).abs() <= tol);
    grid
}

/// `T = m·n_r·½(la − lu)·i² / 2π`. Equal inductances give zero torque.
pub fn average_torque(la: f64, lu: f64, current: f64, phases: u32, rotor_poles: u32) -> Result<f64> {
    if !(la >= lu && lu >= 0.0 && la.is_finite()) {
        return Err(Error::domain(format!(
            "aligned inductance {la} must not be below unaligned {lu}"
        )));
    }
    if !(current > 0.0) || phases == 0 || rotor_poles == 0 {
        return Err(Error::domain("current, phases and rotor poles must be > 0"));
    }
    let stroke_work = 0.5 * (la - lu) * current * current;
    Ok((phases * rotor_poles) as f64 * stroke_work / (2.0 * PI))
}

/// Average torque from the area of the idealized λ–i loop: energize at the
/// unaligned position, hold `current` while the profile rises, de-energize
/// along the aligned line. `profile` must run from unaligned to aligned.
pub fn loop_integrated_torque(profile: &CurveSeries, current: f64, phases: u32, rotor_poles: u32) -> Result<f64> {
    profile.validate()?;
    if !(current > 0.0) {
        return Err(Error::domain("current must be > 0"));
    }
    let mut pts = Vec::with_capacity(profile.points.len() + 1);
    pts.push((0.0, 0.0));
    pts.extend(profile.points.iter().map(|&(_, l)| (current, l * current)));
    // ∮ i dλ by the trapezoid rule, closing back to the origin
    let mut work = 0.0;
    for k in 0..pts.len() {
        let (i0, l0) = pts[k];
        let (i1, l1) = pts[(k + 1) % pts.len()];
        work += 0.5 * (i0 + i1) * (l1 - l0);
    }
    Ok((phases * rotor_poles) as f64 * work / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suggestion {
    pub parameter: String,
    pub direction: Direction,
    pub value: f64,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SRMDesignReport {
    pub geometry: SRMGeometry,
    pub la: f64,
    pub lu: f64,
    pub aligned_path: FluxPath,
    pub flux_paths: Vec<FluxPath>,
    /// Unaligned to aligned.
    pub profile: CurveSeries,
    /// One full rotor pole pitch.
    pub profile_full_pitch: CurveSeries,
    pub regions: ProfileRegions,
    pub average_torque: f64,
    pub airgap_power: f64,
    pub target_torque: f64,
    pub torque_gap: f64,
    pub torque_tolerance: f64,
    pub target_achieved: bool,
    pub suggestions: Vec<Suggestion>,
}

pub fn evaluate_srm(
    spec: &SRMSpec,
    geom: &SRMGeometry,
    constants: &SRMConstants,
    material: &Material,
) -> Result<SRMDesignReport> {
    spec.validate()?;
    constants.validate()?;
    check_feasibility(spec.phases, spec.rotor_poles, spec.beta_s, spec.beta_r)?;
    let (la, aligned_path) = aligned_inductance(spec, geom, spec.peak_current, material)?;
    let (lu, flux_paths) = unaligned_inductance(spec, geom, constants, material)?;
    if !(la > lu) {
        return Err(Error::infeasible(
            "la > lu",
            format!(
                "aligned inductance {la:.4e} H not above unaligned {lu:.4e} H at {} A",
                spec.peak_current
            ),
        ));
    }
    let regions = profile_regions(spec.beta_s, spec.beta_r, spec.rotor_poles);
    let n = constants.profile_points;
    let boundaries = [
        regions.rise_start,
        regions.dwell_start,
        regions.aligned,
        regions.dwell_end,
        regions.fall_end,
    ];
    let profile = inductance_profile(
        la,
        lu,
        spec.beta_s,
        spec.beta_r,
        spec.rotor_poles,
        &profile_grid(0.0, regions.aligned, n, &boundaries),
    )?;
    let profile_full_pitch = inductance_profile(
        la,
        lu,
        spec.beta_s,
        spec.beta_r,
        spec.rotor_poles,
        &profile_grid(0.0, regions.period, 2 * n - 1, &boundaries),
    )?;
    let torque = average_torque(la, lu, spec.peak_current, spec.phases, spec.rotor_poles)?;
    let target = spec.target_torque();
    let gap = torque - target;
    let mut report = SRMDesignReport {
        geometry: geom.clone(),
        la,
        lu,
        aligned_path,
        flux_paths,
        profile,
        profile_full_pitch,
        regions,
        average_torque: torque,
        airgap_power: torque * spec.omega(),
        target_torque: target,
        torque_gap: gap,
        torque_tolerance: constants.torque_tolerance,
        target_achieved: gap.abs() <= constants.torque_tolerance * target,
        suggestions: Vec::new(),
    };
    report.suggestions = suggest_refinement(&report, spec, constants);
    Ok(report)
}

/// Size the machine and evaluate it.
pub fn design_srm(spec: &SRMSpec, constants: &SRMConstants, material: &Material) -> Result<SRMDesignReport> {
    let geom = size_srm(spec, constants)?;
    evaluate_srm(spec, &geom, constants, material)
}

/// Advice for moving the average torque toward the target. Every proposed
/// arc pair satisfies the feasibility triangle.
pub fn suggest_refinement(report: &SRMDesignReport, spec: &SRMSpec, constants: &SRMConstants) -> Vec<Suggestion> {
    let target = report.target_torque;
    let gap = report.torque_gap;
    let mut out = Vec::new();
    if gap.abs() <= constants.torque_tolerance * target {
        return out;
    }
    let pitch = 2.0 * PI / spec.rotor_poles as f64;
    let ceiling = pitch - constants.arc_margin;
    let (bs, br) = (spec.beta_s, spec.beta_r);
    let feasible = |s: f64, r: f64| check_feasibility(spec.phases, spec.rotor_poles, s, r).is_ok() && s + r <= ceiling;
    let current = if report.average_torque > 0.0 {
        spec.peak_current * (target / report.average_torque).sqrt()
    } else {
        spec.peak_current * 1.5
    };

    if gap < 0.0 {
        let mut new_bs = bs * (1.0 + constants.arc_step);
        let mut new_br = br.max(new_bs);
        if new_bs + new_br > ceiling {
            if br >= new_bs {
                new_bs = ceiling - br;
            } else {
                new_bs = 0.5 * ceiling;
            }
            new_br = br.max(new_bs);
        }
        if new_bs > bs && feasible(new_bs, new_br) {
            out.push(Suggestion {
                parameter: "beta_s".into(),
                direction: Direction::Increase,
                value: new_bs,
                rationale: format!(
                    "average torque {:.4} N·m is {:.4} N·m short; a wider stator arc raises the aligned inductance",
                    report.average_torque, -gap
                ),
            });
            if new_br > br {
                out.push(Suggestion {
                    parameter: "beta_r".into(),
                    direction: Direction::Increase,
                    value: new_br,
                    rationale: "keeps beta_s <= beta_r with the wider stator arc".into(),
                });
            }
        }
        out.push(Suggestion {
            parameter: "peak_current".into(),
            direction: Direction::Increase,
            value: current.min(1.5 * spec.peak_current),
            rationale: "torque grows with the square of the phase current".into(),
        });
    } else {
        let floor = pitch / spec.phases as f64;
        let new_bs = (bs * (1.0 - constants.arc_step)).max(floor);
        if new_bs < bs && feasible(new_bs, br) {
            out.push(Suggestion {
                parameter: "beta_s".into(),
                direction: Direction::Decrease,
                value: new_bs,
                rationale: format!(
                    "average torque {:.4} N·m exceeds the target by {:.4} N·m; a narrower stator arc lowers it",
                    report.average_torque, gap
                ),
            });
        }
        out.push(Suggestion {
            parameter: "peak_current".into(),
            direction: Direction::Decrease,
            value: current,
            rationale: "torque grows with the square of the phase current".into(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::bundled_library;
    use proptest::prelude::*;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    pub(crate) fn spec_64() -> SRMSpec {
        SRMSpec {
            target: Target::PowerKw(5.0),
            speed_rpm: 1500.0,
            dc_voltage: 300.0,
            phases: 3,
            stator_poles: 6,
            rotor_poles: 4,
            beta_s: deg(30.0),
            beta_r: deg(32.0),
            air_gap: 0.3e-3,
            peak_current: 10.0,
            material: "M19".into(),
        }
    }

    fn spec_86() -> SRMSpec {
        SRMSpec {
            phases: 4,
            stator_poles: 8,
            rotor_poles: 6,
            beta_s: deg(18.0),
            beta_r: deg(22.0),
            ..spec_64()
        }
    }

    fn m19() -> Material {
        bundled_library().get("M19").unwrap().clone()
    }

    #[test]
    fn pole_width_example() {
        assert!((pole_width(0.1, PI / 6.0) - 0.025882).abs() < 1e-6);
    }

    #[test]
    fn feasibility_triangle() {
        assert!(check_feasibility(3, 4, deg(30.0), deg(32.0)).is_ok());
        let e = check_feasibility(3, 4, deg(40.0), deg(50.0)).unwrap_err();
        assert_eq!(e.field_path(), Some(BOUND_ARC_SUM));
        let e = check_feasibility(3, 4, deg(34.0), deg(32.0)).unwrap_err();
        assert_eq!(e.field_path(), Some(BOUND_ARC_ORDER));
        let e = check_feasibility(3, 4, deg(20.0), deg(32.0)).unwrap_err();
        assert_eq!(e.field_path(), Some(BOUND_SELF_START));
    }

    #[test]
    fn sizing_invariants() {
        let c = SRMConstants::default();
        for s in [spec_64(), spec_86()] {
            let g = size_srm(&s, &c).unwrap();
            assert!(g.stator_back_iron >= 0.5 * g.stator_pole_width);
            assert!(g.rotor_back_iron >= 0.5 * g.stator_pole_width);
            let outer = g.bore_diameter + 2.0 * (g.stator_pole_height + g.stator_back_iron);
            assert!((outer - g.outer_diameter).abs() < 1e-15);
            assert_eq!(g.turns_per_phase % s.poles_per_phase(), 0);
            assert!((pole_width(g.bore_diameter, s.beta_s) - g.stator_pole_width).abs() < 1e-15);
        }
    }

    #[test]
    fn doubling_power_doubles_d2l() {
        let c = SRMConstants::default();
        let a = size_srm(&spec_64(), &c).unwrap();
        let b = size_srm(
            &SRMSpec {
                target: Target::PowerKw(10.0),
                ..spec_64()
            },
            &c,
        )
        .unwrap();
        let v = |g: &SRMGeometry| g.bore_diameter * g.bore_diameter * g.stack_length;
        assert!((v(&b) - 2.0 * v(&a)).abs() < 1e-12 * v(&b));
    }

    #[test]
    fn torque_and_power_targets_agree() {
        let c = SRMConstants::default();
        let p = spec_64();
        let t = SRMSpec {
            target: Target::TorqueNm(p.target_torque()),
            ..p.clone()
        };
        let (a, b) = (size_srm(&p, &c).unwrap(), size_srm(&t, &c).unwrap());
        assert!((a.bore_diameter - b.bore_diameter).abs() < 1e-12);
    }

    #[test]
    fn aligned_low_current_matches_linear_closed_form() {
        let s = spec_64();
        let mat = m19();
        let g = size_srm(&s, &SRMConstants::default()).unwrap();
        let (_, path) = aligned_inductance(&s, &g, 1.0, &mat).unwrap();
        let mu = mat.initial_permeability();
        let sum: f64 = path
            .segments
            .iter()
            .map(|seg| seg.length / (if seg.medium == "air" { crate::MU_0 } else { mu } * seg.area))
            .sum();
        let n = g.turns_per_phase as f64;
        let closed = n * n / (s.poles_per_phase() as f64 * sum);
        let (la_small, _) = aligned_inductance(&s, &g, 0.01 * s.peak_current, &mat).unwrap();
        assert!((la_small - closed).abs() <= 0.01 * closed, "{la_small} vs {closed}");
        let (la_big, _) = aligned_inductance(&s, &g, 2.0 * s.peak_current, &mat).unwrap();
        assert!(la_big < la_small);
    }

    #[test]
    fn aligned_gap_scaling() {
        let s = spec_64();
        let mat = m19();
        let g = size_srm(&s, &SRMConstants::default()).unwrap();
        let i = 0.001 * s.peak_current;
        let (la1, p1) = aligned_inductance(&s, &g, i, &mat).unwrap();
        let wide = SRMGeometry {
            air_gap: 10.0 * g.air_gap,
            ..g.clone()
        };
        let (la10, p10) = aligned_inductance(&s, &wide, i, &mat).unwrap();
        // ratio of inductances tracks the ratio of linear reluctances
        let ratio = p10.reluctance / p1.reluctance;
        assert!(((la1 / la10) - ratio).abs() <= 1e-6 * ratio);
        assert!(la10 < la1);
    }

    #[test]
    fn unaligned_contributions() {
        let s = spec_64();
        let c = SRMConstants::default();
        let g = size_srm(&s, &c).unwrap();
        let (lu, paths) = unaligned_inductance(&s, &g, &c, &m19()).unwrap();
        assert_eq!(paths.len(), 7);
        let n2 = (g.turns_per_phase as f64).powi(2);
        for p in &paths {
            assert!(p.reluctance > 0.0 && p.inductance_contribution >= 0.0);
            assert!((p.inductance_contribution * p.reluctance - p.enclosure_fraction * n2).abs() <= 1e-12 * n2);
        }
        let mut fewer = c.clone();
        fewer.flux_paths.pop();
        let (lu6, _) = unaligned_inductance(&s, &g, &fewer, &m19()).unwrap();
        assert!(lu6 < lu);
        let (la, _) = aligned_inductance(&s, &g, s.peak_current, &m19()).unwrap();
        assert!(la > lu);
    }

    #[test]
    fn overlapping_unaligned_geometry_rejected() {
        let s = SRMSpec {
            beta_s: deg(44.0),
            beta_r: deg(46.0),
            ..spec_64()
        };
        let g = size_srm(&spec_64(), &SRMConstants::default()).unwrap();
        assert!(unaligned_inductance(&s, &g, &SRMConstants::default(), &m19()).is_err());
    }

    #[test]
    fn profile_examples() {
        // n_r = 6: aligned 30° from unaligned
        let r = profile_regions(deg(18.0), deg(22.0), 6);
        assert!((r.aligned - deg(30.0)).abs() < 1e-15);
        let p = inductance_profile(0.05, 0.01, deg(18.0), deg(22.0), 6, &[0.0, deg(30.0), deg(60.0)]).unwrap();
        assert_eq!(p.points[0].1, 0.01);
        assert_eq!(p.points[1].1, 0.05);
        assert_eq!(p.points[2].1, 0.01);
        // equal arcs leave no dwell
        let r = profile_regions(deg(30.0), deg(30.0), 4);
        assert_eq!(r.dwell_start, r.dwell_end);
        assert!(inductance_profile(0.05, 0.01, deg(18.0), deg(22.0), 6, &[deg(61.0)]).is_err());
    }

    #[test]
    fn torque_examples() {
        let t = average_torque(0.010, 0.002, 10.0, 3, 4).unwrap();
        assert!((t - 0.4 * 12.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((t - 0.7639).abs() < 1e-4);
        assert_eq!(average_torque(0.01, 0.01, 10.0, 3, 4).unwrap(), 0.0);
        assert!(average_torque(0.001, 0.01, 10.0, 3, 4).is_err());
    }

    /// Independent oracle: shoelace area of the (i, λ) polygon.
    fn shoelace(profile: &CurveSeries, i: f64) -> f64 {
        let mut pts = vec![(0.0, 0.0)];
        pts.extend(profile.points.iter().map(|&(_, l)| (i, l * i)));
        let n = pts.len();
        (0..n)
            .map(|k| {
                let (x0, y0) = pts[k];
                let (x1, y1) = pts[(k + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
            .abs()
            * 0.5
    }

    #[test]
    fn loop_integration_matches_closed_form() {
        let r = design_srm(&spec_64(), &SRMConstants::default(), &m19()).unwrap();
        let s = spec_64();
        let looped = loop_integrated_torque(&r.profile, s.peak_current, s.phases, s.rotor_poles).unwrap();
        assert!((looped - r.average_torque).abs() <= 1e-9 * r.average_torque);
        let w = shoelace(&r.profile, s.peak_current);
        assert!((w - 0.5 * (r.la - r.lu) * s.peak_current.powi(2)).abs() <= 1e-9 * w);
    }

    #[test]
    fn report_invariants_and_advice() {
        let c = SRMConstants::default();
        for s in [spec_64(), spec_86()] {
            let r = design_srm(&s, &c, &m19()).unwrap();
            assert!(r.la > r.lu);
            assert_eq!(r.profile.points.first().unwrap().1, r.lu);
            assert_eq!(r.profile.points.last().unwrap().1, r.la);
            for sug in &r.suggestions {
                let (mut bs, mut br) = (s.beta_s, s.beta_r);
                match sug.parameter.as_str() {
                    "beta_s" => bs = sug.value,
                    "beta_r" => br = sug.value,
                    _ => continue,
                }
                if sug.parameter == "beta_s" {
                    if let Some(b) = r.suggestions.iter().find(|x| x.parameter == "beta_r") {
                        br = b.value;
                    }
                }
                assert!(check_feasibility(s.phases, s.rotor_poles, bs, br).is_ok());
            }
        }
    }

    #[test]
    fn advice_direction_follows_gap() {
        let c = SRMConstants::default();
        let s = spec_64();
        let g = size_srm(&s, &c).unwrap();
        let r = evaluate_srm(&s, &g, &c, &m19()).unwrap();
        let with_target = |t: f64| {
            let spec = SRMSpec {
                target: Target::TorqueNm(t),
                ..s.clone()
            };
            evaluate_srm(&spec, &g, &c, &m19()).unwrap()
        };
        let rh = with_target(r.average_torque * 2.0);
        assert!(rh.torque_gap < 0.0);
        assert!(rh
            .suggestions
            .iter()
            .any(|x| x.parameter == "beta_s" && x.direction == Direction::Increase));
        let rl = with_target(r.average_torque * 0.5);
        assert!(rl.torque_gap > 0.0);
        assert!(rl.suggestions.iter().all(|x| x.direction == Direction::Decrease));
        let ro = with_target(r.average_torque);
        assert!(ro.target_achieved);
        assert!(ro.suggestions.is_empty());
        // the gap flips sign as the target crosses the average
        assert!(with_target(r.average_torque * 0.99).torque_gap > 0.0);
        assert!(with_target(r.average_torque * 1.01).torque_gap < 0.0);
    }

    #[test]
    fn arc_increase_capped_by_pitch() {
        let c = SRMConstants::default();
        // arcs already close to the sum bound
        let s = SRMSpec {
            beta_s: deg(43.0),
            beta_r: deg(46.5),
            target: Target::TorqueNm(1e3),
            ..spec_64()
        };
        let r = design_srm(&s, &c, &m19()).unwrap();
        let bs = r.suggestions.iter().find(|x| x.parameter == "beta_s");
        if let Some(b) = bs {
            assert!(b.value + s.beta_r < 2.0 * PI / 4.0);
        }
    }

    proptest! {
        #[test]
        fn profile_shape(bs_deg in 30.0f64..40.0, extra in 0.0f64..8.0, la in 0.02f64..0.2, ratio in 0.05f64..0.5) {
            let (bs, br) = (deg(bs_deg), deg(bs_deg + extra));
            prop_assume!(bs + br < PI / 2.0);
            let lu = la * ratio;
            let r = profile_regions(bs, br, 4);
            let grid = profile_grid(0.0, r.period, 361, &[r.rise_start, r.dwell_start, r.dwell_end, r.fall_end]);
            let p = inductance_profile(la, lu, bs, br, 4, &grid).unwrap();
            for w in p.points.windows(2) {
                let slope = w[1].1 - w[0].1;
                if w[1].0 <= r.rise_start || w[0].0 >= r.fall_end || (w[0].0 >= r.dwell_start && w[1].0 <= r.dwell_end) {
                    prop_assert_eq!(slope, 0.0);
                } else if w[1].0 <= r.dwell_start {
                    prop_assert!(slope > 0.0);
                } else if w[0].0 >= r.dwell_end {
                    prop_assert!(slope < 0.0);
                }
            }
            // rising width equals beta_s, so it never shrinks as beta_s grows
            prop_assert!((r.dwell_start - r.rise_start - bs).abs() < 1e-12);
        }

        #[test]
        fn aligned_non_increasing_in_current(i1 in 0.1f64..40.0, k in 1.0f64..4.0) {
            let s = spec_64();
            let mat = m19();
            let g = size_srm(&s, &SRMConstants::default()).unwrap();
            let (a, _) = aligned_inductance(&s, &g, i1, &mat).unwrap();
            let (b, _) = aligned_inductance(&s, &g, i1 * k, &mat).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-9));
        }
    }
}
