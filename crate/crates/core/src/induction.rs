//! Squirrel-cage induction motor synthesis and the torque–slip characteristic.
//!
//! Single-phase machines run through the same pipeline with `phases = 1`;
//! the only difference is the output-coefficient derating and the slot
//! count per pole, both in [`IMConstants`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::CurveSeries;
use crate::error::{require_fraction, require_positive, Error, Result};
use crate::materials::Material;
use crate::sizing::{
    self, check_poles, separate_main_dimensions, validate_policy, Loadings, MainDimensions, ShapePolicy,
};
use crate::MU_0;

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IMSpec {
    /// Shaft output, kW.
    pub power_kw: f64,
    pub line_voltage: f64,
    pub frequency: f64,
    pub phases: u32,
    pub poles: u32,
    pub assumed_efficiency: f64,
    pub assumed_pf: f64,
    pub winding_factor: f64,
    pub material: String,
}

impl IMSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("power_kw", self.power_kw)?;
        require_positive("line_voltage", self.line_voltage)?;
        require_positive("frequency", self.frequency)?;
        if self.phases != 1 && self.phases != 3 {
            return Err(Error::invalid("phases", format!("must be 1 or 3, got {}", self.phases)));
        }
        if check_poles(self.poles).is_err() {
            return Err(Error::invalid(
                "poles",
                format!("must be even and >= 2, got {}", self.poles),
            ));
        }
        require_fraction("assumed_efficiency", self.assumed_efficiency)?;
        require_fraction("assumed_pf", self.assumed_pf)?;
        if !(self.winding_factor > 0.0 && self.winding_factor <= 1.0) {
            return Err(Error::invalid("winding_factor", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingLimits {
    pub b_av_max: f64,
    pub ac_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IMConstants {
    pub schema_version: u32,
    pub b_av: f64,
    pub ac: f64,
    /// `C₀ = factor·K_w·B_av·ac·10⁻³`, kVA per m³·rps.
    pub c0_factor: f64,
    pub single_phase_derating: f64,
    pub shape: ShapePolicy,
    /// `g = base + coefficient·√(D·L)`, mm with D and L in m.
    pub air_gap_base_mm: f64,
    pub air_gap_coefficient_mm: f64,
    pub slots_per_pole_per_phase: u32,
    pub single_phase_slots_per_pole: u32,
    /// A/mm²
    pub stator_current_density: f64,
    pub bar_current_density: f64,
    pub end_ring_current_density: f64,
    /// Fraction of stator ampere-turns balanced by the cage.
    pub rotor_mmf_fraction: f64,
    /// Starting point for the bar count search, as a fraction of stator slots.
    pub rotor_bar_ratio: f64,
    /// Bar extension beyond the core at each end, m.
    pub bar_extension: f64,
    /// Mean end-ring diameter as a fraction of the rotor diameter.
    pub end_ring_diameter_fraction: f64,
    pub stator_resistivity: f64,
    pub rotor_resistivity: f64,
    /// Total specific leakage permeance per unit length (slot, overhang, zigzag).
    pub leakage_permeance: f64,
    pub limits: LoadingLimits,
    pub torque_slip_points: usize,
}

impl Default for IMConstants {
    fn default() -> Self {
        IMConstants {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            b_av: 0.45,
            ac: 23000.0,
            c0_factor: 11.0,
            single_phase_derating: 0.6,
            shape: ShapePolicy::Ratio { l_over_tau: 1.0 },
            air_gap_base_mm: 0.2,
            air_gap_coefficient_mm: 2.0,
            slots_per_pole_per_phase: 3,
            single_phase_slots_per_pole: 6,
            stator_current_density: 5.0,
            bar_current_density: 6.0,
            end_ring_current_density: 7.0,
            rotor_mmf_fraction: 0.85,
            rotor_bar_ratio: 0.8,
            bar_extension: 0.02,
            end_ring_diameter_fraction: 0.85,
            stator_resistivity: 2.1e-8,
            rotor_resistivity: 2.1e-8,
            leakage_permeance: 4.0,
            limits: LoadingLimits {
                b_av_max: 0.65,
                ac_max: 45000.0,
            },
            torque_slip_points: 2000,
        }
    }
}

impl IMConstants {
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
            ("c0_factor", self.c0_factor),
            ("single_phase_derating", self.single_phase_derating),
            ("air_gap_base_mm", self.air_gap_base_mm),
            ("air_gap_coefficient_mm", self.air_gap_coefficient_mm),
            ("stator_current_density", self.stator_current_density),
            ("bar_current_density", self.bar_current_density),
            ("end_ring_current_density", self.end_ring_current_density),
            ("rotor_bar_ratio", self.rotor_bar_ratio),
            ("bar_extension", self.bar_extension),
            ("stator_resistivity", self.stator_resistivity),
            ("rotor_resistivity", self.rotor_resistivity),
            ("leakage_permeance", self.leakage_permeance),
            ("limits.b_av_max", self.limits.b_av_max),
            ("limits.ac_max", self.limits.ac_max),
        ] {
            require_positive(f, v)?;
        }
        require_fraction("rotor_mmf_fraction", self.rotor_mmf_fraction)?;
        require_fraction("end_ring_diameter_fraction", self.end_ring_diameter_fraction)?;
        if self.slots_per_pole_per_phase == 0 {
            return Err(Error::invalid("slots_per_pole_per_phase", "must be >= 1"));
        }
        if self.single_phase_slots_per_pole == 0 {
            return Err(Error::invalid("single_phase_slots_per_pole", "must be >= 1"));
        }
        if self.torque_slip_points < 2 {
            return Err(Error::invalid("torque_slip_points", "must be >= 2"));
        }
        validate_policy("shape", &self.shape)
    }
}

/// Per-phase equivalent circuit, stator-referred, Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalentCircuit {
    pub r1: f64,
    pub x1: f64,
    pub r2: f64,
    pub x2: f64,
}

impl EquivalentCircuit {
    /// Slip of maximum torque, `r2 / √(r1² + (x1 + x2)²)`.
    pub fn peak_slip(&self) -> f64 {
        self.r2 / self.r1.hypot(self.x1 + self.x2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IMDesign {
    pub kva_input: f64,
    pub synchronous_speed_rpm: f64,
    /// `P/(D²·L·N)`, kVA per m³·rpm.
    pub output_coefficient: f64,
    pub main: MainDimensions,
    /// Loadings the sizing assumed.
    pub design_loadings: Loadings,
    /// Magnetic loading at the design flux and electric loading realized
    /// by the integer winding.
    pub loadings: Loadings,
    pub flux_per_pole: f64,
    pub pole_pitch: f64,
    pub stator_slots: u32,
    pub conductors_per_slot: u32,
    pub stator_turns_per_phase: u32,
    pub phase_voltage: f64,
    pub phase_current: f64,
    pub total_ampere_conductors: f64,
    pub conductor_area: f64,
    pub air_gap: f64,
    pub rotor_bars: u32,
    pub bar_current: f64,
    pub bar_area: f64,
    pub end_ring_current: f64,
    pub end_ring_area: f64,
    pub equivalent_circuit: EquivalentCircuit,
    pub peak_slip: f64,
    pub peak_torque: f64,
    pub starting_torque: f64,
    pub torque_slip: CurveSeries,
    /// Same characteristic in synchronous watts.
    pub torque_slip_sync_watts: CurveSeries,
}

/// Synchronous speed and slip for a motoring rotor speed.
pub fn slip(frequency: f64, poles: u32, rotor_speed_rpm: f64) -> Result<(f64, f64)> {
    let n_sync = sizing::synchronous_speed_rpm(frequency, poles)?;
    if !(rotor_speed_rpm >= 0.0) {
        return Err(Error::domain(format!(
            "rotor speed must be >= 0, got {rotor_speed_rpm}"
        )));
    }
    if rotor_speed_rpm > n_sync {
        return Err(Error::domain(format!(
            "rotor speed {rotor_speed_rpm} rpm above synchronous {n_sync} rpm (motoring convention)"
        )));
    }
    Ok((n_sync, (n_sync - rotor_speed_rpm) / n_sync))
}

/// Electromagnetic torque at slip `s` for the approximate equivalent circuit.
pub fn torque_at_slip(ec: &EquivalentCircuit, v_phase: f64, omega_sync: f64, phases: f64, s: f64) -> f64 {
    let r2s = ec.r2 / s;
    let x = ec.x1 + ec.x2;
    phases / omega_sync * v_phase * v_phase * r2s / ((ec.r1 + r2s).powi(2) + x * x)
}

/// Torque–slip series on `s_grid`. Zero slip is excluded from the grid:
/// the torque limit there is zero but `r2/s` is singular.
pub fn torque_slip_curve(
    ec: &EquivalentCircuit,
    v_phase: f64,
    frequency: f64,
    poles: u32,
    phases: u32,
    s_grid: &[f64],
) -> Result<CurveSeries> {
    if !(ec.r2 > 0.0) || !(ec.r1 >= 0.0 && ec.x1 >= 0.0 && ec.x2 >= 0.0) {
        return Err(Error::domain("impedances must be >= 0 with r2 > 0"));
    }
    check_poles(poles)?;
    if !(v_phase > 0.0 && frequency > 0.0 && phases > 0) {
        return Err(Error::domain("voltage, frequency and phases must be positive"));
    }
    if let Some(&s) = s_grid.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
        return Err(Error::domain(format!("slip grid value {s} outside (0, 1]")));
    }
    let omega = 4.0 * PI * frequency / poles as f64;
    CurveSeries::sample("torque_slip", "slip", "torque (N·m)", s_grid, |s| {
        Ok(torque_at_slip(ec, v_phase, omega, phases as f64, s))
    })
}

/// `n` evenly spaced slips `k/n`, k = 1..=n.
pub fn slip_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

/// Cogging and crawling guard on the stator/rotor slot combination.
pub fn slot_combination_ok(stator_slots: u32, rotor_bars: u32, poles: u32) -> bool {
    let diff = stator_slots.abs_diff(rotor_bars);
    diff != 0 && diff != 1 && diff != 2 && diff != poles
}

fn pick_rotor_bars(stator_slots: u32, poles: u32, ratio: f64) -> Result<u32> {
    let start = (stator_slots as f64 * ratio).round() as i64;
    let lo = (stator_slots as i64 + 1) / 2;
    let hi = 2 * stator_slots as i64;
    for k in 0..=(hi - lo) {
        for cand in [start - k, start + k] {
            if cand >= lo.max(poles as i64 + 1) && cand <= hi && slot_combination_ok(stator_slots, cand as u32, poles) {
                return Ok(cand as u32);
            }
        }
    }
    Err(Error::infeasible(
        "rotor_bars slot combination",
        format!("no bar count in [{lo}, {hi}] avoids cogging/crawling with {stator_slots} stator slots"),
    ))
}

pub fn design_induction(spec: &IMSpec, constants: &IMConstants, _material: &Material) -> Result<IMDesign> {
    spec.validate()?;
    constants.validate()?;
    let c = constants;
    let m = spec.phases as f64;
    let p = spec.poles;
    let kw = spec.winding_factor;

    let kva = spec.power_kw / (spec.assumed_efficiency * spec.assumed_pf);
    let n_sync = sizing::synchronous_speed_rpm(spec.frequency, p)?;
    let ns = n_sync / 60.0;

    let design_loadings = Loadings::new(c.b_av, c.ac)?;
    check_limits(&design_loadings, &c.limits)?;
    let mut c0 = c.c0_factor * kw * c.b_av * c.ac * 1e-3;
    if spec.phases == 1 {
        c0 *= c.single_phase_derating;
    }
    let main = separate_main_dimensions(kva / (c0 * ns), c.shape, p)?;
    let (d, l) = (main.d, main.l);
    let tau = main.pole_pitch(p);

    // stator winding
    let flux = sizing::flux_per_pole(p, c.b_av, d, l)?;
    let v_ph = spec.line_voltage;
    let q = if spec.phases == 1 {
        c.single_phase_slots_per_pole
    } else {
        c.slots_per_pole_per_phase
    };
    let slots = q * p * spec.phases;
    let turns_target = v_ph / (4.44 * spec.frequency * flux * kw);
    let cps = ((2.0 * m * turns_target / slots as f64).round() as u32).max(1);
    let turns = slots * cps / (2 * spec.phases);
    let i_ph = kva * 1e3 / (m * v_ph);
    let amp_cond = i_ph * 2.0 * m * turns as f64;
    let loadings = Loadings::new(c.b_av, sizing::specific_electric_loading(amp_cond, d)?)?;
    check_limits(&loadings, &c.limits)?;
    let a_s = i_ph / (c.stator_current_density * 1e6);

    let air_gap = (c.air_gap_base_mm + c.air_gap_coefficient_mm * (d * l).sqrt()) * 1e-3;

    // cage
    let bars = pick_rotor_bars(slots, p, c.rotor_bar_ratio)?;
    let i_bar = c.rotor_mmf_fraction * 2.0 * m * kw * turns as f64 * i_ph / bars as f64;
    let a_bar = i_bar / (c.bar_current_density * 1e6);
    let i_ring = bars as f64 * i_bar / (PI * p as f64);
    let a_ring = i_ring / (c.end_ring_current_density * 1e6);

    // equivalent circuit
    let mlt = 2.0 * l + 2.3 * tau + 0.24;
    let r1 = c.stator_resistivity * turns as f64 * mlt / a_s;
    let r_bar = c.rotor_resistivity * (l + 2.0 * c.bar_extension) / a_bar;
    let ring_d = c.end_ring_diameter_fraction * (d - 2.0 * air_gap);
    let r_ring = c.rotor_resistivity * PI * ring_d / a_ring;
    let rotor_cu = bars as f64 * i_bar * i_bar * r_bar + 2.0 * i_ring * i_ring * r_ring;
    let i_rotor = c.rotor_mmf_fraction * i_ph;
    let r2 = rotor_cu / (m * i_rotor * i_rotor);
    let x1 =
        8.0 * PI * spec.frequency * MU_0 * (turns as f64).powi(2) * l * c.leakage_permeance / (p as f64 * q as f64);
    let ec = EquivalentCircuit { r1, x1, r2, x2: x1 };

    let grid = slip_grid(c.torque_slip_points);
    let torque_slip = torque_slip_curve(&ec, v_ph, spec.frequency, p, spec.phases, &grid)?;
    let omega = 4.0 * PI * spec.frequency / p as f64;
    let torque_slip_sync_watts = CurveSeries::new(
        "torque_slip_sync_watts",
        "slip",
        "torque (synchronous W)",
        torque_slip.points.iter().map(|&(s, t)| (s, t * omega)).collect(),
    )?;
    let s_peak = ec.peak_slip();
    let omega_m = omega;

    Ok(IMDesign {
        kva_input: kva,
        synchronous_speed_rpm: n_sync,
        output_coefficient: sizing::output_coefficient(kva, d, l, n_sync)?,
        main,
        design_loadings,
        loadings,
        flux_per_pole: flux,
        pole_pitch: tau,
        stator_slots: slots,
        conductors_per_slot: cps,
        stator_turns_per_phase: turns,
        phase_voltage: v_ph,
        phase_current: i_ph,
        total_ampere_conductors: amp_cond,
        conductor_area: a_s,
        air_gap,
        rotor_bars: bars,
        bar_current: i_bar,
        bar_area: a_bar,
        end_ring_current: i_ring,
        end_ring_area: a_ring,
        equivalent_circuit: ec,
        peak_slip: s_peak,
        peak_torque: torque_at_slip(&ec, v_ph, omega_m, m, s_peak),
        starting_torque: torque_at_slip(&ec, v_ph, omega_m, m, 1.0),
        torque_slip,
        torque_slip_sync_watts,
    })
}

fn check_limits(l: &Loadings, limits: &LoadingLimits) -> Result<()> {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::bundled_library;

    fn spec() -> IMSpec {
        IMSpec {
            power_kw: 10.0,
            line_voltage: 400.0,
            frequency: 50.0,
            phases: 3,
            poles: 4,
            assumed_efficiency: 0.85,
            assumed_pf: 0.85,
            winding_factor: 0.955,
            material: "M19".into(),
        }
    }

    fn design(s: &IMSpec) -> IMDesign {
        let lib = bundled_library();
        design_induction(s, &IMConstants::default(), lib.get("M19").unwrap()).unwrap()
    }

    #[test]
    fn kva_and_speed_examples() {
        let d = design(&spec());
        assert!((d.kva_input - 13.841).abs() < 1e-3);
        assert_eq!(d.synchronous_speed_rpm, 1500.0);
    }

    #[test]
    fn slip_examples() {
        assert_eq!(slip(50.0, 4, 1500.0).unwrap(), (1500.0, 0.0));
        assert_eq!(slip(50.0, 4, 0.0).unwrap(), (1500.0, 1.0));
        let (n, s) = slip(50.0, 4, 1440.0).unwrap();
        assert_eq!(n, 1500.0);
        assert!((s - 0.04).abs() < 1e-15);
        assert!(slip(50.0, 4, 1501.0).is_err());
        assert!(slip(50.0, 3, 1000.0).is_err());
    }

    #[test]
    fn torque_limit_at_small_slip() {
        let ec = EquivalentCircuit {
            r1: 0.3,
            x1: 0.4,
            r2: 0.2,
            x2: 0.4,
        };
        let c = torque_slip_curve(&ec, 230.0, 50.0, 4, 3, &[1e-6, 0.25, 1.0]).unwrap();
        let peak = c.points[1].1;
        assert!(c.points[0].1 < 1e-3 * peak);
    }

    #[test]
    fn peak_slip_without_stator_resistance() {
        let ec = EquivalentCircuit {
            r1: 0.0,
            x1: 0.4,
            r2: 0.2,
            x2: 0.4,
        };
        assert!((ec.peak_slip() - 0.25).abs() < 1e-15);
        let c = torque_slip_curve(&ec, 230.0, 50.0, 4, 3, &slip_grid(2000)).unwrap();
        // dense-grid argmax oracle
        let (s_best, _) = c.argmax();
        assert!((s_best - 0.25).abs() <= 1.0 / 2000.0);
    }

    #[test]
    fn torque_scales_with_voltage_squared() {
        let ec = EquivalentCircuit {
            r1: 0.3,
            x1: 0.5,
            r2: 0.25,
            x2: 0.6,
        };
        let g = slip_grid(50);
        let a = torque_slip_curve(&ec, 100.0, 50.0, 4, 3, &g).unwrap();
        let b = torque_slip_curve(&ec, 200.0, 50.0, 4, 3, &g).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((q.1 - 4.0 * p.1).abs() <= 1e-12 * q.1);
        }
    }

    #[test]
    fn zero_slip_rejected() {
        let ec = EquivalentCircuit {
            r1: 0.3,
            x1: 0.5,
            r2: 0.25,
            x2: 0.6,
        };
        assert!(torque_slip_curve(&ec, 100.0, 50.0, 4, 3, &[0.0, 0.5]).is_err());
        let bad = EquivalentCircuit { r2: 0.0, ..ec };
        assert!(torque_slip_curve(&bad, 100.0, 50.0, 4, 3, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn design_round_trips_loadings() {
        for (kw, poles, phases) in [(10.0, 4, 3), (2.2, 2, 3), (75.0, 6, 3), (0.75, 4, 1)] {
            let s = IMSpec {
                power_kw: kw,
                poles,
                phases,
                ..spec()
            };
            let d = design(&s);
            let b = sizing::specific_magnetic_loading(poles, d.flux_per_pole, d.main.d, d.main.l).unwrap();
            assert!((b - d.loadings.b_av).abs() <= 1e-9 * b);
            assert!((b - d.design_loadings.b_av).abs() <= 1e-9 * b);
            let ac = sizing::specific_electric_loading(d.total_ampere_conductors, d.main.d).unwrap();
            assert!((ac - d.loadings.ac).abs() <= 1e-9 * ac);
            assert!(slot_combination_ok(d.stator_slots, d.rotor_bars, poles));
            assert!(d.air_gap > 0.0);
            assert!(d.peak_slip > 0.0 && d.peak_slip < 1.0, "{kw} kW: s_max {}", d.peak_slip);
            let (s_best, _) = d.torque_slip.argmax();
            assert!((s_best - d.peak_slip).abs() <= 1.0 / 2000.0 + 1e-12);
        }
    }

    #[test]
    fn slot_guard() {
        assert!(!slot_combination_ok(36, 36, 4));
        assert!(!slot_combination_ok(36, 34, 4));
        assert!(!slot_combination_ok(36, 32, 4));
        assert!(!slot_combination_ok(36, 35, 4));
        assert!(slot_combination_ok(36, 28, 4));
        assert_eq!(pick_rotor_bars(36, 4, 0.8).unwrap(), 29);
    }

    #[test]
    fn invalid_spec_fields() {
        let s = IMSpec { poles: 5, ..spec() };
        assert_eq!(s.validate().unwrap_err().field_path(), Some("poles"));
        let s = IMSpec {
            assumed_pf: 1.2,
            ..spec()
        };
        assert_eq!(s.validate().unwrap_err().field_path(), Some("assumed_pf"));
    }

    #[test]
    fn overloaded_magnetic_loading_is_infeasible() {
        let c = IMConstants {
            b_av: 0.9,
            ..IMConstants::default()
        };
        let lib = bundled_library();
        let err = design_induction(&spec(), &c, lib.get("M19").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }
}
