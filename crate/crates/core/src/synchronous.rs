//! Salient-pole and round-rotor synchronous machine synthesis, Carter's
//! coefficient and the open-circuit characteristic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{linspace, CurveSeries};
use crate::error::{require_fraction, require_positive, Error, Result};
use crate::materials::{solve_series_magnetic_circuit, total_mmf_drop, CircuitSegment, Material};
use crate::sizing::{self, separate_main_dimensions, validate_policy, Loadings, MainDimensions, ShapePolicy};
use crate::MU_0;

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotorType {
    Salient,
    Round,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncSpec {
    pub kva: f64,
    pub line_voltage: f64,
    pub frequency: f64,
    pub speed_rpm: f64,
    pub rotor_type: RotorType,
    pub phases: u32,
    pub winding_factor: f64,
    pub material: String,
}

impl SyncSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("kva", self.kva)?;
        require_positive("line_voltage", self.line_voltage)?;
        require_positive("frequency", self.frequency)?;
        require_positive("speed_rpm", self.speed_rpm)?;
        if self.phases != 1 && self.phases != 3 {
            return Err(Error::invalid("phases", format!("must be 1 or 3, got {}", self.phases)));
        }
        if !(self.winding_factor > 0.0 && self.winding_factor <= 1.0) {
            return Err(Error::invalid("winding_factor", "must lie in (0, 1]"));
        }
        self.poles().map(|_| ())
    }

    /// Pole count from `120·f/N`; must come out an even integer.
    pub fn poles(&self) -> Result<u32> {
        let exact = 120.0 * self.frequency / self.speed_rpm;
        let p = exact.round();
        if (exact - p).abs() > 1e-9 * exact || p < 2.0 || !(p as u64).is_multiple_of(2) || p > u32::MAX as f64 {
            return Err(Error::invalid(
                "speed_rpm",
                format!("120·f/N = {exact} is not an even pole count"),
            ));
        }
        Ok(p as u32)
    }

    fn phase_voltage(&self) -> f64 {
        if self.phases == 3 {
            self.line_voltage / 3f64.sqrt()
        } else {
            self.line_voltage
        }
    }
}

/// Rotor geometry rule that sets the flux spread over a pole pitch and the
/// window the field coil sits in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RotorLayout {
    Salient {
        /// Pole arc over pole pitch.
        pole_arc_ratio: f64,
        /// Field coil height over pole pitch.
        coil_height_ratio: f64,
    },
    Round {
        /// Slotted fraction of the rotor periphery.
        wound_fraction: f64,
        /// Rotor slot width over rotor slot pitch.
        slot_width_fraction: f64,
    },
}

impl RotorLayout {
    /// Fraction of the pole pitch that carries the gap flux. A uniformly
    /// distributed round-rotor winding gives a trapezoidal MMF whose mean is
    /// `1 − wound/2`.
    pub fn effective_arc_ratio(&self) -> f64 {
        match *self {
            RotorLayout::Salient { pole_arc_ratio, .. } => pole_arc_ratio,
            RotorLayout::Round { wound_fraction, .. } => 1.0 - 0.5 * wound_fraction,
        }
    }

    /// Depth of field copper for a coil-side cross-section `coil_area`.
    fn field_depth(&self, coil_area: f64, pole_pitch: f64, rotor_pitch: f64) -> f64 {
        match *self {
            RotorLayout::Salient { coil_height_ratio, .. } => coil_area / (coil_height_ratio * pole_pitch),
            RotorLayout::Round {
                wound_fraction,
                slot_width_fraction,
            } => 2.0 * coil_area / (wound_fraction * slot_width_fraction * rotor_pitch),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        match *self {
            RotorLayout::Salient {
                pole_arc_ratio,
                coil_height_ratio,
            } => {
                require_fraction(&format!("{field}.salient.pole_arc_ratio"), pole_arc_ratio)?;
                require_positive(&format!("{field}.salient.coil_height_ratio"), coil_height_ratio)
            }
            RotorLayout::Round {
                wound_fraction,
                slot_width_fraction,
            } => {
                require_fraction(&format!("{field}.round.wound_fraction"), wound_fraction)?;
                require_fraction(&format!("{field}.round.slot_width_fraction"), slot_width_fraction)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorConstants {
    pub b_av: f64,
    pub ac: f64,
    pub shape: ShapePolicy,
    /// `g = gap_factor·τ·ac/B_av`.
    pub gap_factor: f64,
    /// Full-load over no-load field ampere-turns.
    pub full_load_field_factor: f64,
    /// Rotor surface speed limit, m/s.
    pub max_peripheral_speed: f64,
    pub min_poles: u32,
    pub layout: RotorLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncLimits {
    pub b_av_max: f64,
    pub ac_max: f64,
    /// Stator tooth flux density at rated EMF, T.
    pub tooth_b_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncConstants {
    pub schema_version: u32,
    /// `C₀ = factor·K_w·B_av·ac·10⁻³`, kVA per m³·rps.
    pub c0_factor: f64,
    pub salient: RotorConstants,
    pub round: RotorConstants,
    pub slots_per_pole_per_phase: u32,
    /// Stator slot opening over slot pitch.
    pub slot_opening_fraction: f64,
    /// Stator slot width over slot pitch.
    pub slot_width_fraction: f64,
    /// Slot depth over slot width.
    pub slot_depth_ratio: f64,
    /// Stator yoke flux density at rated flux, T.
    pub core_flux_density: f64,
    /// A/mm²
    pub stator_current_density: f64,
    /// A/mm²
    pub field_current_density: f64,
    pub field_fill_factor: f64,
    pub exciter_voltage: f64,
    /// Share of the exciter voltage left for the field coils.
    pub exciter_reserve: f64,
    pub field_resistivity: f64,
    pub limits: SyncLimits,
    pub occ_points: usize,
    /// OCC grid upper end over full-load field current.
    pub occ_max_factor: f64,
    pub core_loss_points: usize,
    pub core_loss_b_max: f64,
    pub field_depth_points: usize,
}

impl Default for SyncConstants {
    fn default() -> Self {
        SyncConstants {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            c0_factor: 11.0,
            salient: RotorConstants {
                b_av: 0.58,
                ac: 30000.0,
                shape: ShapePolicy::Ratio { l_over_tau: 1.5 },
                gap_factor: 4.0e-7,
                full_load_field_factor: 1.8,
                max_peripheral_speed: 80.0,
                min_poles: 4,
                layout: RotorLayout::Salient {
                    pole_arc_ratio: 0.65,
                    coil_height_ratio: 0.45,
                },
            },
            round: RotorConstants {
                b_av: 0.55,
                ac: 40000.0,
                shape: ShapePolicy::Ratio { l_over_tau: 1.6 },
                gap_factor: 2.0e-7,
                full_load_field_factor: 1.7,
                max_peripheral_speed: 175.0,
                min_poles: 2,
                layout: RotorLayout::Round {
                    wound_fraction: 0.7,
                    slot_width_fraction: 0.6,
                },
            },
            slots_per_pole_per_phase: 3,
            slot_opening_fraction: 0.45,
            slot_width_fraction: 0.45,
            slot_depth_ratio: 4.0,
            core_flux_density: 1.2,
            stator_current_density: 4.0,
            field_current_density: 3.0,
            field_fill_factor: 0.6,
            exciter_voltage: 110.0,
            exciter_reserve: 0.8,
            field_resistivity: 2.1e-8,
            limits: SyncLimits {
                b_av_max: 0.75,
                ac_max: 80000.0,
                tooth_b_max: 2.1,
            },
            occ_points: 41,
            occ_max_factor: 1.0,
            core_loss_points: 20,
            core_loss_b_max: 2.0,
            field_depth_points: 16,
        }
    }
}

impl SyncConstants {
    pub fn rotor(&self, rotor_type: RotorType) -> &RotorConstants {
        match rotor_type {
            RotorType::Salient => &self.salient,
            RotorType::Round => &self.round,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONSTANTS_SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        for (name, r) in [("salient", &self.salient), ("round", &self.round)] {
            for (f, v) in [
                ("b_av", r.b_av),
                ("ac", r.ac),
                ("gap_factor", r.gap_factor),
                ("full_load_field_factor", r.full_load_field_factor),
                ("max_peripheral_speed", r.max_peripheral_speed),
            ] {
                require_positive(&format!("{name}.{f}"), v)?;
            }
            if r.full_load_field_factor < 1.0 {
                return Err(Error::invalid(format!("{name}.full_load_field_factor"), "must be >= 1"));
            }
            validate_policy(&format!("{name}.shape"), &r.shape)?;
            r.layout.validate(&format!("{name}.layout"))?;
        }
        if !matches!(self.salient.layout, RotorLayout::Salient { .. }) {
            return Err(Error::invalid("salient.layout", "salient rotor needs a salient layout"));
        }
        if !matches!(self.round.layout, RotorLayout::Round { .. }) {
            return Err(Error::invalid("round.layout", "round rotor needs a round layout"));
        }
        for (f, v) in [
            ("c0_factor", self.c0_factor),
            ("slot_depth_ratio", self.slot_depth_ratio),
            ("core_flux_density", self.core_flux_density),
            ("stator_current_density", self.stator_current_density),
            ("field_current_density", self.field_current_density),
            ("exciter_voltage", self.exciter_voltage),
            ("field_resistivity", self.field_resistivity),
            ("limits.b_av_max", self.limits.b_av_max),
            ("limits.ac_max", self.limits.ac_max),
            ("limits.tooth_b_max", self.limits.tooth_b_max),
            ("occ_max_factor", self.occ_max_factor),
            ("core_loss_b_max", self.core_loss_b_max),
        ] {
            require_positive(f, v)?;
        }
        if !(0.0..1.0).contains(&self.slot_opening_fraction) {
            return Err(Error::invalid("slot_opening_fraction", "must lie in [0, 1)"));
        }
        require_fraction("slot_width_fraction", self.slot_width_fraction)?;
        require_fraction("field_fill_factor", self.field_fill_factor)?;
        require_fraction("exciter_reserve", self.exciter_reserve)?;
        if self.slot_opening_fraction > self.slot_width_fraction {
            return Err(Error::invalid(
                "slot_opening_fraction",
                "must not exceed slot_width_fraction",
            ));
        }
        if self.slots_per_pole_per_phase == 0 {
            return Err(Error::invalid("slots_per_pole_per_phase", "must be >= 1"));
        }
        for (f, n) in [
            ("occ_points", self.occ_points),
            ("core_loss_points", self.core_loss_points),
            ("field_depth_points", self.field_depth_points),
        ] {
            if n < 5 {
                return Err(Error::invalid(f, "must be >= 5"));
            }
        }
        Ok(())
    }
}

/// Per-pole OCC circuit: effective gap, stator teeth and half the stator
/// yoke (carrying half the pole flux, so entered with doubled area).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccCircuit {
    pub gap_length: f64,
    pub gap_area: f64,
    pub teeth_length: f64,
    pub teeth_area: f64,
    pub core_length: f64,
    pub core_area: f64,
}

impl OccCircuit {
    pub fn segments<'m>(&self, material: &'m Material) -> Result<Vec<CircuitSegment<'m>>> {
        Ok(vec![
            CircuitSegment::air(self.gap_length, self.gap_area)?,
            CircuitSegment::iron(self.teeth_length, self.teeth_area, material)?,
            CircuitSegment::iron(self.core_length, self.core_area, material)?,
        ])
    }

    pub fn gap_reluctance(&self) -> f64 {
        self.gap_length / (MU_0 * self.gap_area)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncDesign {
    pub rotor_type: RotorType,
    pub poles: u32,
    /// `P/(D²·L·N)`, kVA per m³·rpm.
    pub output_coefficient: f64,
    pub main: MainDimensions,
    pub design_loadings: Loadings,
    /// Magnetic loading at the design flux and electric loading realized
    /// by the integer winding.
    pub loadings: Loadings,
    pub flux_per_pole: f64,
    pub pole_pitch: f64,
    pub peripheral_speed: f64,
    pub air_gap: f64,
    pub stator_slots: u32,
    pub conductors_per_slot: u32,
    pub turns_per_phase: u32,
    pub phase_voltage: f64,
    pub phase_current: f64,
    pub total_ampere_conductors: f64,
    pub conductor_area: f64,
    pub slot_pitch: f64,
    pub slot_opening: f64,
    pub slot_depth: f64,
    pub core_depth: f64,
    pub outer_diameter: f64,
    pub carter_k: f64,
    pub effective_air_gap: f64,
    pub effective_arc_ratio: f64,
    /// Flux per pole at rated EMF with the integer winding, Wb.
    pub rated_flux: f64,
    pub tooth_flux_density: f64,
    pub circuit: OccCircuit,
    /// Line EMF per weber of pole flux.
    pub emf_per_weber: f64,
    pub no_load_field_mmf: f64,
    pub full_load_field_mmf: f64,
    pub field_turns_per_pole: u32,
    pub field_conductor_area: f64,
    pub field_current_fl: f64,
    pub field_winding_depth: f64,
    /// Slope of the line through the origin with iron removed, V/A.
    pub air_gap_line_slope: f64,
    pub occ: CurveSeries,
    pub core_loss_curve: CurveSeries,
    pub field_depth_curve: CurveSeries,
}

/// `K_c = y_s/(y_s − γ·g)` with `γ = (w/g)²/(5 + w/g)`.
pub fn carter_coefficient(slot_pitch: f64, slot_opening: f64, gap: f64) -> Result<f64> {
    if !(slot_pitch > 0.0 && slot_pitch.is_finite()) {
        return Err(Error::domain(format!("slot pitch must be > 0, got {slot_pitch}")));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::domain(format!("gap must be > 0, got {gap}")));
    }
    if !(slot_opening >= 0.0) || slot_opening >= slot_pitch {
        return Err(Error::domain(format!(
            "slot opening {slot_opening} must lie in [0, slot pitch {slot_pitch})"
        )));
    }
    let r = slot_opening / gap;
    let gamma = r * r / (5.0 + r);
    Ok(slot_pitch / (slot_pitch - gamma * gap))
}

/// EMF against field current for a per-pole circuit. `emf_per_weber`
/// converts pole flux to line volts.
pub fn occ_from_segments(
    segments: &[CircuitSegment<'_>],
    field_turns_per_pole: f64,
    emf_per_weber: f64,
    field_current_grid: &[f64],
) -> Result<CurveSeries> {
    check_field_grid(field_current_grid)?;
    if !(field_turns_per_pole > 0.0 && emf_per_weber > 0.0) {
        return Err(Error::domain("field turns and EMF constant must be > 0"));
    }
    CurveSeries::sample("occ", "field current (A)", "line EMF (V)", field_current_grid, |i| {
        let sol = solve_series_magnetic_circuit(segments, field_turns_per_pole * i)?;
        Ok(emf_per_weber * sol.flux)
    })
}

pub fn open_circuit_characteristic(
    design: &SyncDesign,
    material: &Material,
    field_current_grid: &[f64],
) -> Result<CurveSeries> {
    let segments = design.circuit.segments(material)?;
    occ_from_segments(
        &segments,
        design.field_turns_per_pole as f64,
        design.emf_per_weber,
        field_current_grid,
    )
}

fn check_field_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::domain("field current grid must start at 0"));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "field current grid must be finite and strictly increasing",
        ));
    }
    Ok(())
}

pub fn design_synchronous(spec: &SyncSpec, constants: &SyncConstants, material: &Material) -> Result<SyncDesign> {
    spec.validate()?;
    constants.validate()?;
    let c = constants;
    let rc = c.rotor(spec.rotor_type);
    let rotor_name = match spec.rotor_type {
        RotorType::Salient => "salient",
        RotorType::Round => "round",
    };
    let p = spec.poles()?;
    if p < rc.min_poles {
        return Err(Error::infeasible(
            format!("poles >= {rotor_name}.min_poles"),
            format!(
                "{p}-pole machine is below the {rotor_name} rotor minimum of {}; use a round rotor",
                rc.min_poles
            ),
        ));
    }
    let m = spec.phases as f64;
    let kw = spec.winding_factor;
    let ns = spec.speed_rpm / 60.0;

    let design_loadings = Loadings::new(rc.b_av, rc.ac)?;
    check_limits(&design_loadings, &c.limits)?;
    let c0 = c.c0_factor * kw * rc.b_av * rc.ac * 1e-3;
    let main = separate_main_dimensions(spec.kva / (c0 * ns), rc.shape, p)?;
    let (d, l) = (main.d, main.l);
    let tau = main.pole_pitch(p);
    let v_periph = PI * d * ns;
    if v_periph > rc.max_peripheral_speed {
        return Err(Error::infeasible(
            format!("peripheral_speed <= {rotor_name}.max_peripheral_speed"),
            format!(
                "rotor surface speed {v_periph:.1} m/s exceeds the {rotor_name} limit {} m/s{}",
                rc.max_peripheral_speed,
                if spec.rotor_type == RotorType::Salient {
                    "; use a round rotor"
                } else {
                    ""
                }
            ),
        ));
    }

    // stator winding
    let flux = sizing::flux_per_pole(p, rc.b_av, d, l)?;
    let v_ph = spec.phase_voltage();
    let slots = c.slots_per_pole_per_phase * p * spec.phases;
    let turns_target = v_ph / (4.44 * spec.frequency * flux * kw);
    let cps = ((2.0 * m * turns_target / slots as f64).round() as u32).max(1);
    let turns = slots * cps / (2 * spec.phases);
    let i_ph = spec.kva * 1e3 / (m * v_ph);
    let amp_cond = i_ph * 2.0 * m * turns as f64;
    let loadings = Loadings::new(rc.b_av, sizing::specific_electric_loading(amp_cond, d)?)?;
    check_limits(&loadings, &c.limits)?;

    // gap and slotting
    let air_gap = rc.gap_factor * tau * rc.ac / rc.b_av;
    let slot_pitch = PI * d / slots as f64;
    let slot_opening = c.slot_opening_fraction * slot_pitch;
    let carter_k = carter_coefficient(slot_pitch, slot_opening, air_gap)?;
    let slot_width = c.slot_width_fraction * slot_pitch;
    let slot_depth = c.slot_depth_ratio * slot_width;
    let sf = material.stacking_factor;
    let core_depth = flux / (2.0 * c.core_flux_density * l * sf);
    let outer_diameter = d + 2.0 * (slot_depth + core_depth);
    let psi = rc.layout.effective_arc_ratio();

    let circuit = OccCircuit {
        gap_length: carter_k * air_gap,
        gap_area: psi * tau * l,
        teeth_length: slot_depth,
        teeth_area: psi * tau * (1.0 - c.slot_width_fraction) * l * sf,
        core_length: PI * (d + 2.0 * slot_depth + core_depth) / (2.0 * p as f64),
        core_area: 2.0 * core_depth * l * sf,
    };
    let line_factor = if spec.phases == 3 { 3f64.sqrt() } else { 1.0 };
    let emf_per_weber = 4.44 * spec.frequency * kw * turns as f64 * line_factor;
    let rated_flux = spec.line_voltage / emf_per_weber;
    let tooth_b = rated_flux / circuit.teeth_area;
    if tooth_b > c.limits.tooth_b_max {
        return Err(Error::infeasible(
            "tooth_flux_density <= limits.tooth_b_max",
            format!("stator teeth at {tooth_b:.2} T above {} T", c.limits.tooth_b_max),
        ));
    }

    // field system
    let segments = circuit.segments(material)?;
    let at_nl = total_mmf_drop(&segments, rated_flux);
    let at_fl = rc.full_load_field_factor * at_nl;
    let mlt = 2.0 * (l + psi * tau);
    let coil_voltage = c.exciter_reserve * c.exciter_voltage / p as f64;
    let a_f = c.field_resistivity * mlt * at_fl / coil_voltage;
    let i_f = c.field_current_density * 1e6 * a_f;
    let field_turns = ((at_fl / i_f).round() as u32).max(1);
    let i_fl = at_fl / field_turns as f64;
    let rotor_pitch = PI * (d - 2.0 * air_gap) / p as f64;
    let depth_at = |at: f64| {
        let coil_area = at / (c.field_current_density * 1e6 * c.field_fill_factor);
        rc.layout.field_depth(coil_area, tau, rotor_pitch)
    };
    let field_depth = depth_at(at_fl);
    let rotor_radius = 0.5 * d - air_gap;
    if field_depth >= 0.5 * rotor_radius {
        return Err(Error::infeasible(
            "field_winding_depth < rotor_radius/2",
            format!("field winding needs {field_depth:.3} m of a {rotor_radius:.3} m rotor radius"),
        ));
    }
    let field_depth_curve = CurveSeries::sample(
        "field_depth",
        "field MMF per pole (At)",
        "field winding depth (m)",
        &linspace(0.0, 1.5 * at_fl, c.field_depth_points),
        |at| Ok(depth_at(at)),
    )?;

    let occ = occ_from_segments(
        &segments,
        field_turns as f64,
        emf_per_weber,
        &linspace(0.0, c.occ_max_factor * i_fl, c.occ_points),
    )?;
    let core_loss_curve = CurveSeries::sample(
        "core_loss",
        "flux density (T)",
        "core loss (W/kg)",
        &linspace(
            c.core_loss_b_max / c.core_loss_points as f64,
            c.core_loss_b_max,
            c.core_loss_points,
        ),
        |b| material.specific_core_loss(b, spec.frequency),
    )?;

    Ok(SyncDesign {
        rotor_type: spec.rotor_type,
        poles: p,
        output_coefficient: sizing::output_coefficient(spec.kva, d, l, spec.speed_rpm)?,
        main,
        design_loadings,
        loadings,
        flux_per_pole: flux,
        pole_pitch: tau,
        peripheral_speed: v_periph,
        air_gap,
        stator_slots: slots,
        conductors_per_slot: cps,
        turns_per_phase: turns,
        phase_voltage: v_ph,
        phase_current: i_ph,
        total_ampere_conductors: amp_cond,
        conductor_area: i_ph / (c.stator_current_density * 1e6),
        slot_pitch,
        slot_opening,
        slot_depth,
        core_depth,
        outer_diameter,
        carter_k,
        effective_air_gap: carter_k * air_gap,
        effective_arc_ratio: psi,
        rated_flux,
        tooth_flux_density: tooth_b,
        circuit,
        emf_per_weber,
        no_load_field_mmf: at_nl,
        full_load_field_mmf: at_fl,
        field_turns_per_pole: field_turns,
        field_conductor_area: a_f,
        field_current_fl: i_fl,
        field_winding_depth: field_depth,
        air_gap_line_slope: emf_per_weber * field_turns as f64 / circuit.gap_reluctance(),
        occ,
        core_loss_curve,
        field_depth_curve,
    })
}

fn check_limits(l: &Loadings, limits: &SyncLimits) -> Result<()> {
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
