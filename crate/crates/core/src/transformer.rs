//! Core-type and shell-type transformer synthesis, single and three phase.
//!
//! The pipeline seeds the EMF per turn from `K·√Q`, sizes the core from the
//! maximum flux, the window from the output equation, and then rounds the
//! winding turns. LV turns round up, so the working flux density never
//! exceeds the design value.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::curve::CurveSeries;
use crate::error::{require_fraction, require_positive, Error, Result};
use crate::materials::Material;
use crate::MU_0;

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreForm {
    Core,
    Shell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connection {
    Star,
    Delta,
    Single,
}

impl Connection {
    /// Phase voltage for a line voltage.
    pub fn phase_voltage(self, line: f64) -> f64 {
        match self {
            Connection::Star => line / 3f64.sqrt(),
            Connection::Delta | Connection::Single => line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerSpec {
    pub kva: f64,
    /// Line voltages, V.
    pub hv_voltage: f64,
    pub lv_voltage: f64,
    pub frequency: f64,
    pub phases: u32,
    pub core_form: CoreForm,
    pub connection: Connection,
    pub material: String,
}

impl TransformerSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("kva", self.kva)?;
        require_positive("hv_voltage", self.hv_voltage)?;
        require_positive("lv_voltage", self.lv_voltage)?;
        require_positive("frequency", self.frequency)?;
        if self.hv_voltage < self.lv_voltage {
            return Err(Error::invalid("hv_voltage", "must not be below lv_voltage"));
        }
        match (self.phases, self.connection) {
            (1, Connection::Single) => Ok(()),
            (1, _) => Err(Error::invalid("connection", "single-phase units use `single`")),
            (3, Connection::Single) => Err(Error::invalid("connection", "three-phase units need `star` or `delta`")),
            (3, _) => Ok(()),
            (p, _) => Err(Error::invalid("phases", format!("must be 1 or 3, got {p}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerForm {
    pub core: f64,
    pub shell: f64,
}

impl PerForm {
    pub fn get(&self, form: CoreForm) -> f64 {
        match form {
            CoreForm::Core => self.core,
            CoreForm::Shell => self.shell,
        }
    }
}

/// `K` in `Eₜ = K·√Q` for each (phases, core form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmfConstants {
    pub single_phase: PerForm,
    pub three_phase: PerForm,
}

/// `K_w = numerator / (offset_kv + kV_hv)` unless `fixed` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpaceFactor {
    pub numerator: f64,
    pub offset_kv: f64,
    pub fixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerConstants {
    pub schema_version: u32,
    pub emf_constant: EmfConstants,
    /// Design maximum flux density, T.
    pub max_flux_density: PerForm,
    /// A/mm²
    pub current_density: f64,
    pub window_space_factor: WindowSpaceFactor,
    pub window_height_to_width: PerForm,
    /// Winding conductor resistivity at working temperature, Ω·m.
    pub resistivity: f64,
    /// Coil build and HV-LV duct as fractions of the coil space across the window.
    pub coil_build_fraction: f64,
    pub coil_duct_fraction: f64,
    /// Power factor of the efficiency curve and full-load efficiency.
    pub efficiency_pf: f64,
    pub regulation_pf: f64,
    pub load_grid_step: f64,
    /// Upper end of the efficiency load grid; extended when the
    /// maximum-efficiency load lies beyond it.
    pub load_grid_max: f64,
}

impl Default for TransformerConstants {
    fn default() -> Self {
        TransformerConstants {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            emf_constant: EmfConstants {
                single_phase: PerForm {
                    core: 0.80,
                    shell: 1.10,
                },
                three_phase: PerForm {
                    core: 0.45,
                    shell: 1.30,
                },
            },
            max_flux_density: PerForm { core: 1.3, shell: 1.1 },
            current_density: 2.3,
            window_space_factor: WindowSpaceFactor {
                numerator: 10.0,
                offset_kv: 30.0,
                fixed: None,
            },
            window_height_to_width: PerForm { core: 2.5, shell: 3.0 },
            resistivity: 2.1e-8,
            coil_build_fraction: 0.4,
            coil_duct_fraction: 0.2,
            efficiency_pf: 1.0,
            regulation_pf: 0.8,
            load_grid_step: 0.01,
            load_grid_max: 1.25,
        }
    }
}

impl TransformerConstants {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONSTANTS_SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        let e = &self.emf_constant;
        require_positive("emf_constant.single_phase.core", e.single_phase.core)?;
        require_positive("emf_constant.single_phase.shell", e.single_phase.shell)?;
        require_positive("emf_constant.three_phase.core", e.three_phase.core)?;
        require_positive("emf_constant.three_phase.shell", e.three_phase.shell)?;
        require_positive("max_flux_density.core", self.max_flux_density.core)?;
        require_positive("max_flux_density.shell", self.max_flux_density.shell)?;
        require_positive("current_density", self.current_density)?;
        require_positive("window_space_factor.numerator", self.window_space_factor.numerator)?;
        if !(self.window_space_factor.offset_kv >= 0.0) {
            return Err(Error::invalid("window_space_factor.offset_kv", "must be >= 0"));
        }
        if let Some(kw) = self.window_space_factor.fixed {
            require_fraction("window_space_factor.fixed", kw)?;
        }
        require_positive("window_height_to_width.core", self.window_height_to_width.core)?;
        require_positive("window_height_to_width.shell", self.window_height_to_width.shell)?;
        require_positive("resistivity", self.resistivity)?;
        require_fraction("coil_build_fraction", self.coil_build_fraction)?;
        require_fraction("coil_duct_fraction", self.coil_duct_fraction)?;
        check_pf("efficiency_pf", self.efficiency_pf)?;
        check_pf("regulation_pf", self.regulation_pf)?;
        require_positive("load_grid_step", self.load_grid_step)?;
        require_positive("load_grid_max", self.load_grid_max)?;
        Ok(())
    }

    pub fn emf_k(&self, phases: u32, form: CoreForm) -> f64 {
        if phases == 1 {
            self.emf_constant.single_phase.get(form)
        } else {
            self.emf_constant.three_phase.get(form)
        }
    }

    /// Window space factor for an HV winding at `hv_line_voltage` volts.
    pub fn space_factor(&self, hv_line_voltage: f64) -> f64 {
        let w = &self.window_space_factor;
        w.fixed
            .unwrap_or(w.numerator / (w.offset_kv + hv_line_voltage / 1000.0))
    }
}

fn check_pf(field: &str, pf: f64) -> Result<()> {
    if pf > 0.0 && pf <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("power factor must lie in (0, 1], got {pf}"),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDimensions {
    pub height: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorAreas {
    pub hv: f64,
    pub lv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerDesign {
    /// `K·√Q` seed, V.
    pub design_emf_per_turn: f64,
    /// Working EMF per turn after turn rounding, V.
    pub emf_per_turn: f64,
    /// Working peak flux, Wb.
    pub flux_max: f64,
    /// Gross limb cross-section, m².
    pub core_area: f64,
    pub net_core_area: f64,
    /// Working peak flux density in the limb, T.
    pub flux_density: f64,
    pub hv_turns: u32,
    pub lv_turns: u32,
    pub hv_phase_voltage: f64,
    pub lv_phase_voltage: f64,
    pub hv_phase_current: f64,
    pub lv_phase_current: f64,
    pub window_space_factor: f64,
    pub window_area: f64,
    pub window_dimensions: WindowDimensions,
    pub limb_width: f64,
    pub conductor_areas: ConductorAreas,
    pub mean_turn_length: f64,
    pub core_mass: f64,
    pub core_loss: f64,
    pub copper_loss_fl: f64,
    /// Equivalent resistance and leakage reactance referred to HV, Ω per phase.
    pub r_eq_hv: f64,
    pub x_eq_hv: f64,
    pub no_load_current_pct: f64,
    pub efficiency_fl: f64,
    pub regulation_fl: f64,
    pub max_efficiency_load: f64,
    /// Rated output in W, kept for performance queries.
    pub rated_va: f64,
    pub efficiency_curve: CurveSeries,
}

/// `Eₜ = K·√Q`, Q in kVA.
pub fn emf_per_turn(k: f64, kva: f64) -> f64 {
    k * kva.sqrt()
}

/// `φₘ = Eₜ / (4.44·f)`.
pub fn max_flux(emf_per_turn: f64, frequency: f64) -> f64 {
    emf_per_turn / (4.44 * frequency)
}

/// Load fraction of maximum efficiency, `√(P_core / P_cu)`.
pub fn max_efficiency_load(p_core: f64, p_cu_fl: f64) -> f64 {
    (p_core / p_cu_fl).sqrt()
}

/// Efficiency in % at load fraction `x`. Zero output is 0 % by convention.
pub fn efficiency_pct(rated_va: f64, p_core: f64, p_cu_fl: f64, x: f64, pf: f64) -> f64 {
    let out = x * rated_va * pf;
    let total = out + p_core + x * x * p_cu_fl;
    if out <= 0.0 || total <= 0.0 {
        0.0
    } else {
        100.0 * out / total
    }
}

pub fn design_transformer(
    spec: &TransformerSpec,
    constants: &TransformerConstants,
    material: &Material,
) -> Result<TransformerDesign> {
    spec.validate()?;
    constants.validate()?;
    let form = spec.core_form;
    let f = spec.frequency;
    let bm = constants.max_flux_density.get(form);
    let knee = material.knee_flux_density();
    if bm > knee {
        return Err(Error::infeasible(
            "flux_density <= material knee",
            format!(
                "design flux density {bm} T exceeds the {knee} T knee of `{}`",
                material.name
            ),
        ));
    }

    // (a)-(c): EMF per turn, flux, core section
    let seed_et = emf_per_turn(constants.emf_k(spec.phases, form), spec.kva);
    let seed_flux = max_flux(seed_et, f);
    let net_area = seed_flux / bm;
    let core_area = net_area / material.stacking_factor;

    // (d): window from the output equation
    let kw = constants.space_factor(spec.hv_voltage);
    if !(kw > 0.0 && kw < 1.0) {
        return Err(Error::invalid(
            "window_space_factor",
            format!("space factor {kw} outside (0, 1)"),
        ));
    }
    let c = if spec.phases == 1 { 2.22 } else { 3.33 };
    let delta = constants.current_density * 1e6;
    let window_area = spec.kva / (c * f * bm * kw * delta * net_area * 1e-3);
    let ratio = constants.window_height_to_width.get(form);
    let ww = (window_area / ratio).sqrt();
    let hw = ratio * ww;

    // (e): turns
    let v_hv = spec.connection.phase_voltage(spec.hv_voltage);
    let v_lv = spec.connection.phase_voltage(spec.lv_voltage);
    let lv_turns = ((v_lv / seed_et).ceil() as u32).max(1);
    let hv_turns = ((lv_turns as f64 * v_hv / v_lv).round() as u32).max(1);
    let et = v_lv / lv_turns as f64;
    let flux = max_flux(et, f);
    let b = flux / net_area;

    let phases = spec.phases as f64;
    let rated_va = spec.kva * 1e3;
    let i_hv = rated_va / (phases * v_hv);
    let i_lv = rated_va / (phases * v_lv);
    let a_hv = i_hv / delta;
    let a_lv = i_lv / delta;

    // core geometry; limbs are taken as square sections
    let geo = CoreGeometry::new(form, spec.phases, core_area, ww, hw);
    let core_mass = geo.iron_volume * material.density * material.stacking_factor;

    // (f): losses
    let core_loss = core_mass * material.specific_core_loss(b, f)?;
    let mlt = geo.mean_turn_length;
    let rho = constants.resistivity;
    let r_hv = rho * hv_turns as f64 * mlt / a_hv;
    let r_lv = rho * lv_turns as f64 * mlt / a_lv;
    let copper_loss_fl = phases * (i_hv * i_hv * r_hv + i_lv * i_lv * r_lv);
    let turns_ratio = hv_turns as f64 / lv_turns as f64;
    let r_eq_hv = r_hv + r_lv * turns_ratio * turns_ratio;
    let build = constants.coil_build_fraction * geo.coil_space;
    let duct = constants.coil_duct_fraction * geo.coil_space;
    let x_eq_hv = 2.0 * PI * f * MU_0 * (hv_turns as f64).powi(2) * (mlt / hw) * (duct + 2.0 * build / 3.0);

    let at = material.h_at(b)? * geo.mean_flux_path;
    let i_mag = at / (SQRT_2 * hv_turns as f64);
    let i_loss = core_loss / (phases * v_hv);
    let no_load_current_pct = 100.0 * i_mag.hypot(i_loss) / i_hv;

    // (g): efficiency over the load grid, stretched so the peak is on it
    let x_peak = max_efficiency_load(core_loss, copper_loss_fl);
    let grid_max = constants.load_grid_max.max(1.2 * x_peak);
    let n = (grid_max / constants.load_grid_step - 1e-9).ceil() as usize;
    let grid: Vec<f64> = (1..=n).map(|k| k as f64 * constants.load_grid_step).collect();
    let pf = constants.efficiency_pf;
    let efficiency_curve = CurveSeries::sample("efficiency", "load fraction", "efficiency (%)", &grid, |x| {
        Ok(efficiency_pct(rated_va, core_loss, copper_loss_fl, x, pf))
    })?;

    let mut design = TransformerDesign {
        design_emf_per_turn: seed_et,
        emf_per_turn: et,
        flux_max: flux,
        core_area,
        net_core_area: net_area,
        flux_density: b,
        hv_turns,
        lv_turns,
        hv_phase_voltage: v_hv,
        lv_phase_voltage: v_lv,
        hv_phase_current: i_hv,
        lv_phase_current: i_lv,
        window_space_factor: kw,
        window_area,
        window_dimensions: WindowDimensions { height: hw, width: ww },
        limb_width: geo.limb_width,
        conductor_areas: ConductorAreas { hv: a_hv, lv: a_lv },
        mean_turn_length: mlt,
        core_mass,
        core_loss,
        copper_loss_fl,
        r_eq_hv,
        x_eq_hv,
        no_load_current_pct,
        efficiency_fl: efficiency_pct(rated_va, core_loss, copper_loss_fl, 1.0, pf),
        regulation_fl: 0.0,
        max_efficiency_load: max_efficiency_load(core_loss, copper_loss_fl),
        rated_va,
        efficiency_curve,
    };
    design.regulation_fl = transformer_performance(&design, 1.0, constants.regulation_pf)?.regulation;
    Ok(design)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformerPerformance {
    /// %
    pub efficiency: f64,
    /// %
    pub regulation: f64,
    pub max_efficiency_load: f64,
}

pub fn transformer_performance(
    design: &TransformerDesign,
    load_fraction: f64,
    pf: f64,
) -> Result<TransformerPerformance> {
    if !(0.0..=1.25).contains(&load_fraction) {
        return Err(Error::domain(format!(
            "load fraction must lie in [0, 1.25], got {load_fraction}"
        )));
    }
    if !(pf > 0.0 && pf <= 1.0) {
        return Err(Error::domain(format!("power factor must lie in (0, 1], got {pf}")));
    }
    let i = load_fraction * design.hv_phase_current;
    let sin = (1.0 - pf * pf).max(0.0).sqrt();
    let regulation = 100.0 * (i * design.r_eq_hv * pf + i * design.x_eq_hv * sin) / design.hv_phase_voltage;
    Ok(TransformerPerformance {
        efficiency: efficiency_pct(
            design.rated_va,
            design.core_loss,
            design.copper_loss_fl,
            load_fraction,
            pf,
        ),
        regulation,
        max_efficiency_load: design.max_efficiency_load,
    })
}

struct CoreGeometry {
    limb_width: f64,
    iron_volume: f64,
    mean_turn_length: f64,
    mean_flux_path: f64,
    /// Radial space available to one limb's coils, m.
    coil_space: f64,
}

impl CoreGeometry {
    fn new(form: CoreForm, phases: u32, limb_area: f64, ww: f64, hw: f64) -> Self {
        let a = limb_area.sqrt();
        match form {
            CoreForm::Core => {
                // two limbs (1φ) or three limbs (3φ) share the windows
                let windows = if phases == 1 { 1.0 } else { 2.0 };
                let width = (windows + 1.0) * a + windows * ww;
                let height = hw + 2.0 * a;
                let coil_space = ww / 2.0;
                CoreGeometry {
                    limb_width: a,
                    iron_volume: a * (width * height - windows * ww * hw),
                    mean_turn_length: 4.0 * a + PI * coil_space,
                    mean_flux_path: 2.0 * (ww + a) + 2.0 * (hw + a),
                    coil_space,
                }
            }
            CoreForm::Shell => {
                // central limb carries the full flux, outer limbs and yokes half
                let width = 2.0 * a + 2.0 * ww;
                let height = hw + a;
                let one = a * (width * height - 2.0 * ww * hw);
                CoreGeometry {
                    limb_width: a,
                    iron_volume: phases as f64 * one,
                    mean_turn_length: 4.0 * a + PI * ww,
                    mean_flux_path: 2.0 * (ww + 0.75 * a) + 2.0 * (hw + 0.5 * a),
                    coil_space: ww,
                }
            }
        }
    }
}
