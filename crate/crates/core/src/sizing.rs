//! Output coefficient, specific loadings and the D²L split shared by every
//! synthesis pipeline.
//!
//! The engine works in SI internally. Ratings in kVA (or kW) and speeds in
//! rev/min appear only at the output-coefficient boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Physical ceiling for the specific magnetic loading, Wb/m².
pub const MAX_MAGNETIC_LOADING: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Loadings {
    /// Specific magnetic loading, Wb/m².
    pub b_av: f64,
    /// Specific electric loading, A/m.
    pub ac: f64,
}

impl Loadings {
    pub fn new(b_av: f64, ac: f64) -> Result<Self> {
        require_positive("b_av", b_av)?;
        require_positive("ac", ac)?;
        if b_av > MAX_MAGNETIC_LOADING {
            return Err(Error::infeasible(
                "b_av <= 2.5",
                format!("specific magnetic loading {b_av} Wb/m² exceeds the iron ceiling"),
            ));
        }
        Ok(Loadings { b_av, ac })
    }
}

/// Armature (bore) diameter and gross core length, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainDimensions {
    pub d: f64,
    pub l: f64,
}

impl MainDimensions {
    pub fn d2l(&self) -> f64 {
        self.d * self.d * self.l
    }

    pub fn pole_pitch(&self, poles: u32) -> f64 {
        PI * self.d / poles as f64
    }
}

/// How a D²L volume is split into diameter and length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapePolicy {
    /// Core length as a multiple of the pole pitch.
    Ratio {
        l_over_tau: f64,
    },
    FixedDiameter {
        d: f64,
    },
    FixedLength {
        l: f64,
    },
}

impl Default for ShapePolicy {
    fn default() -> Self {
        ShapePolicy::Ratio { l_over_tau: 1.0 }
    }
}

/// `C₀ = P / (D²·L·N)` with P in kVA (kW for DC machines) and N in rev/min.
pub fn output_coefficient(p_kva: f64, d: f64, l: f64, n_rpm: f64) -> Result<f64> {
    for (name, v) in [("p", p_kva), ("d", d), ("l", l), ("n", n_rpm)] {
        positive_arg(name, v)?;
    }
    Ok(p_kva / (d * d * l * n_rpm))
}

/// `B_av = P·φ / (π·D·L)`.
pub fn specific_magnetic_loading(poles: u32, flux_per_pole: f64, d: f64, l: f64) -> Result<f64> {
    check_poles(poles)?;
    if !(flux_per_pole >= 0.0) || !flux_per_pole.is_finite() {
        return Err(Error::domain(format!(
            "flux per pole must be >= 0, got {flux_per_pole}"
        )));
    }
    positive_arg("d", d)?;
    positive_arg("l", l)?;
    Ok(poles as f64 * flux_per_pole / (PI * d * l))
}

/// Flux per pole for a given magnetic loading (inverse of
/// [`specific_magnetic_loading`]).
pub fn flux_per_pole(poles: u32, b_av: f64, d: f64, l: f64) -> Result<f64> {
    check_poles(poles)?;
    Ok(b_av * PI * d * l / poles as f64)
}

/// `ac = I_z·Z / (π·D)`.
pub fn specific_electric_loading(total_ampere_conductors: f64, d: f64) -> Result<f64> {
    positive_arg("total_ampere_conductors", total_ampere_conductors)?;
    positive_arg("d", d)?;
    Ok(total_ampere_conductors / (PI * d))
}

/// Split a D²L volume according to `policy`.
pub fn separate_main_dimensions(d2l: f64, policy: ShapePolicy, poles: u32) -> Result<MainDimensions> {
    positive_arg("d2l", d2l)?;
    let (d, l) = match policy {
        ShapePolicy::Ratio { l_over_tau } => {
            check_poles(poles)?;
            positive_arg("l_over_tau", l_over_tau)?;
            // d²·(k·π·d/p) = d2l
            let d = (d2l * poles as f64 / (l_over_tau * PI)).cbrt();
            (d, l_over_tau * PI * d / poles as f64)
        }
        ShapePolicy::FixedDiameter { d } => {
            positive_arg("fixed diameter", d)?;
            (d, d2l / (d * d))
        }
        ShapePolicy::FixedLength { l } => {
            positive_arg("fixed length", l)?;
            ((d2l / l).sqrt(), l)
        }
    };
    if !(d > 0.0 && l > 0.0 && d.is_finite() && l.is_finite()) {
        return Err(Error::domain(format!(
            "no positive split of D²L = {d2l} (d = {d}, l = {l})"
        )));
    }
    Ok(MainDimensions { d, l })
}

/// `120·f/P`, rev/min.
pub fn synchronous_speed_rpm(frequency: f64, poles: u32) -> Result<f64> {
    check_poles(poles)?;
    positive_arg("frequency", frequency)?;
    Ok(120.0 * frequency / poles as f64)
}

fn positive_arg(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {v}")))
    }
}

pub(crate) fn check_poles(poles: u32) -> Result<()> {
    if poles >= 2 && poles.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::domain(format!("pole count must be even and >= 2, got {poles}")))
    }
}

pub(crate) fn validate_policy(field: &str, policy: &ShapePolicy) -> Result<()> {
    match *policy {
        ShapePolicy::Ratio { l_over_tau } => require_positive(&format!("{field}.ratio.l_over_tau"), l_over_tau),
        ShapePolicy::FixedDiameter { d } => require_positive(&format!("{field}.fixed_diameter.d"), d),
        ShapePolicy::FixedLength { l } => require_positive(&format!("{field}.fixed_length.l"), l),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn output_coefficient_examples() {
        assert_eq!(output_coefficient(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(close(output_coefficient(100.0, 0.25, 0.2, 1000.0).unwrap(), 8.0, 1e-12));
        let base = output_coefficient(50.0, 0.3, 0.2, 750.0).unwrap();
        assert!(close(
            output_coefficient(100.0, 0.3, 0.2, 750.0).unwrap(),
            2.0 * base,
            1e-12
        ));
        assert!(close(
            output_coefficient(50.0, 0.6, 0.2, 750.0).unwrap(),
            base / 4.0,
            1e-12
        ));
        assert!(output_coefficient(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(output_coefficient(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn magnetic_loading_examples() {
        assert_eq!(specific_magnetic_loading(4, 0.0, 0.25, 0.2).unwrap(), 0.0);
        assert!(close(
            specific_magnetic_loading(4, 0.05, 0.25, 0.2).unwrap(),
            1.2732395,
            1e-7
        ));
        assert_eq!(
            specific_magnetic_loading(2, 0.1, 0.25, 0.2).unwrap(),
            specific_magnetic_loading(4, 0.05, 0.25, 0.2).unwrap()
        );
        assert!(specific_magnetic_loading(3, 0.05, 0.25, 0.2).is_err());
        assert!(specific_magnetic_loading(0, 0.05, 0.25, 0.2).is_err());
    }

    #[test]
    fn electric_loading_examples() {
        assert!(close(specific_electric_loading(PI, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(
            specific_electric_loading(10000.0, 0.25).unwrap(),
            12732.395,
            1e-7
        ));
        let a = specific_electric_loading(5000.0, 0.4).unwrap();
        assert!(close(specific_electric_loading(5000.0, 0.2).unwrap(), 2.0 * a, 1e-12));
        assert!(specific_electric_loading(-1.0, 1.0).is_err());
    }

    #[test]
    fn separation_examples() {
        let md = separate_main_dimensions(1.0, ShapePolicy::FixedDiameter { d: 1.0 }, 4).unwrap();
        assert_eq!((md.d, md.l), (1.0, 1.0));
        let md = separate_main_dimensions(0.0125, ShapePolicy::Ratio { l_over_tau: 1.0 }, 4).unwrap();
        assert!((md.d - 0.2515).abs() < 5e-5, "{}", md.d);
        assert!((md.l - 0.1975).abs() < 1e-4, "{}", md.l);
        assert!(close(md.d2l(), 0.0125, 1e-12));
        assert!(separate_main_dimensions(0.0, ShapePolicy::default(), 4).is_err());
        assert!(separate_main_dimensions(1.0, ShapePolicy::FixedLength { l: 0.0 }, 4).is_err());
        assert!(separate_main_dimensions(1.0, ShapePolicy::Ratio { l_over_tau: 1.0 }, 5).is_err());
    }

    #[test]
    fn synchronous_speed() {
        assert_eq!(synchronous_speed_rpm(50.0, 4).unwrap(), 1500.0);
        assert_eq!(synchronous_speed_rpm(50.0, 20).unwrap(), 300.0);
    }

    proptest! {
        #[test]
        fn homogeneity(p in 0.1f64..1e4, d in 0.05f64..3.0, l in 0.05f64..3.0, n in 50.0f64..5000.0, k in 0.1f64..10.0) {
            let c = output_coefficient(p, d, l, n).unwrap();
            prop_assert!(close(output_coefficient(k * p, d, l, n).unwrap(), k * c, 1e-12));
            prop_assert!(close(output_coefficient(p, k * d, l, n).unwrap(), c / (k * k), 1e-12));
            prop_assert!(close(output_coefficient(p, d, l, k * n).unwrap(), c / k, 1e-12));
        }

        #[test]
        fn split_round_trips_c0(p in 1.0f64..5000.0, c0 in 0.01f64..10.0, n in 100.0f64..3000.0,
                                poles in 1u32..12, which in 0usize..3, knob in 0.3f64..3.0) {
            let poles = 2 * poles;
            let d2l = p / (c0 * n);
            let policy = match which {
                0 => ShapePolicy::Ratio { l_over_tau: knob },
                1 => ShapePolicy::FixedDiameter { d: knob },
                _ => ShapePolicy::FixedLength { l: knob },
            };
            let md = separate_main_dimensions(d2l, policy, poles).unwrap();
            prop_assert!(close(md.d2l(), d2l, 1e-12));
            prop_assert!(close(output_coefficient(p, md.d, md.l, n).unwrap(), c0, 1e-9));
            if let ShapePolicy::Ratio { l_over_tau } = policy {
                prop_assert!(close(md.l, l_over_tau * md.pole_pitch(poles), 1e-12));
            }
        }
    }
}
