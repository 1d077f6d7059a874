//! Coplanar-waveguide line parameters by conformal mapping, with an
//! optional kinetic-inductance correction, plus resonator length sizing.
//!
//! For a center strip of width w with gaps s to the ground planes on a
//! substrate of permittivity eps_r, the mapping modulus is
//! k = w/(w + 2s) and
//!
//! ```text
//! eps_eff = 1 + q (eps_r - 1),  q = 1/2 for an infinite substrate
//! Z0      = 30 pi / sqrt(eps_eff) * K(k') / K(k)
//! ```
//!
//! A finite substrate thickness h enters through the standard elliptic
//! filling-factor ratio with k1 = sinh(pi w / 4h) / sinh(pi (w+2s) / 4h).
//! Kinetic inductance adds L_k / w per length (thin-strip approximation:
//! the center strip carries the current); this biases the kinetic term
//! low relative to a full current-crowding treatment but preserves every
//! trend of interest.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::elliptic_k;
use crate::SPEED_OF_LIGHT;

/// Cross-section geometry of a coplanar line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpwGeometry {
    /// Center conductor width, m.
    pub center_width_m: f64,
    /// Gap to each ground plane, m.
    pub gap_m: f64,
    /// Metal film thickness, m (carried for kinetic-inductance use).
    pub film_thickness_m: f64,
    /// Substrate relative permittivity.
    pub substrate_eps_r: f64,
    /// Substrate thickness, m; `None` means infinite.
    pub substrate_thickness_m: Option<f64>,
}

impl CpwGeometry {
    fn check(&self) -> Result<()> {
        if !(self.center_width_m > 0.0 && self.gap_m > 0.0 && self.film_thickness_m > 0.0) {
            return Err(Error::Invalid("w, s, t must all be positive".into()));
        }
        if self.substrate_eps_r <= 1.0 {
            return Err(Error::Invalid("substrate permittivity must exceed 1".into()));
        }
        if let Some(h) = self.substrate_thickness_m {
            if h <= 0.0 {
                return Err(Error::Invalid("substrate thickness must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Per-length line parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineParams {
    pub z0_ohm: f64,
    pub eps_eff: f64,
    pub l_per_m: f64,
    pub c_per_m: f64,
    pub phase_velocity_m_per_s: f64,
}

/// Resonator mode for [`resonator_length`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonatorMode {
    HalfWave,
    QuarterWave,
}

impl std::str::FromStr for ResonatorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" | "half_wave" | "halfwave" => Ok(ResonatorMode::HalfWave),
            "quarter" | "quarter_wave" | "quarterwave" => Ok(ResonatorMode::QuarterWave),
            other => Err(Error::Usage(format!("unknown resonator mode '{other}'"))),
        }
    }
}

/// Line parameters for a geometry, optionally including a sheet kinetic
/// inductance (H per square) folded into the series inductance.
pub fn cpw_line_params(geom: &CpwGeometry, kinetic_sq_h: Option<f64>) -> Result<LineParams> {
    geom.check()?;
    let w = geom.center_width_m;
    let s = geom.gap_m;
    let k = w / (w + 2.0 * s);
    let kp = (1.0 - k * k).sqrt();
    let ratio = elliptic_k(kp) / elliptic_k(k); // K(k')/K(k)

    let filling = match geom.substrate_thickness_m {
        None => 0.5,
        Some(h) => {
            let k1 = ((std::f64::consts::PI * w) / (4.0 * h)).sinh()
                / ((std::f64::consts::PI * (w + 2.0 * s)) / (4.0 * h)).sinh();
            let k1p = (1.0 - k1 * k1).sqrt();
            0.5 * (elliptic_k(k1) / elliptic_k(k1p)) * ratio
        }
    };
    let eps_eff_geo = 1.0 + filling * (geom.substrate_eps_r - 1.0);

    let z0_geo = 30.0 * std::f64::consts::PI / eps_eff_geo.sqrt() * ratio;
    let c_per_m = eps_eff_geo.sqrt() / (SPEED_OF_LIGHT * z0_geo);
    let l_geo = z0_geo * eps_eff_geo.sqrt() / SPEED_OF_LIGHT;

    let l_kin = match kinetic_sq_h {
        Some(lk) => {
            if lk < 0.0 {
                return Err(Error::Invalid("kinetic inductance must be non-negative".into()));
            }
            lk / w
        }
        None => 0.0,
    };
    let l_per_m = l_geo + l_kin;
    let phase_velocity = 1.0 / (l_per_m * c_per_m).sqrt();
    Ok(LineParams {
        z0_ohm: (l_per_m / c_per_m).sqrt(),
        eps_eff: (SPEED_OF_LIGHT / phase_velocity).powi(2),
        l_per_m,
        c_per_m,
        phase_velocity_m_per_s: phase_velocity,
    })
}

/// Physical length of a resonator at `f_target_hz`: v/2f for a half-wave
/// section, v/4f for a quarter-wave section.
pub fn resonator_length(f_target_hz: f64, mode: ResonatorMode, params: &LineParams) -> Result<f64> {
    if f_target_hz <= 0.0 {
        return Err(Error::Invalid("target frequency must be positive".into()));
    }
    let v = params.phase_velocity_m_per_s;
    Ok(match mode {
        ResonatorMode::HalfWave => v / (2.0 * f_target_hz),
        ResonatorMode::QuarterWave => v / (4.0 * f_target_hz),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_geometry(eps_r: f64) -> CpwGeometry {
        CpwGeometry {
            center_width_m: 10e-6,
            gap_m: 6e-6,
            film_thickness_m: 200e-9,
            substrate_eps_r: eps_r,
            substrate_thickness_m: None,
        }
    }

    #[test]
    fn fifty_ohm_reference_design() {
        let p = cpw_line_params(&reference_geometry(11.45), None).unwrap();
        assert_relative_eq!(p.eps_eff, 6.225, epsilon = 1e-9);
        assert_relative_eq!(p.z0_ohm, 50.9, epsilon = 0.1);
        // consistency: Z0 = sqrt(L/C), v = 1/sqrt(LC)
        assert_relative_eq!(p.z0_ohm, (p.l_per_m / p.c_per_m).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            p.phase_velocity_m_per_s,
            1.0 / (p.l_per_m * p.c_per_m).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn impedance_scales_with_permittivity() {
        let a = cpw_line_params(&reference_geometry(11.45), None).unwrap();
        let b = cpw_line_params(&reference_geometry(11.9), None).unwrap();
        assert_relative_eq!(b.eps_eff, 6.45, epsilon = 1e-9);
        assert_relative_eq!(b.z0_ohm, a.z0_ohm * (6.225f64 / 6.45).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn eps_eff_ignores_geometry_for_infinite_substrate() {
        for (w, s) in [(4e-6, 2e-6), (10e-6, 6e-6), (20e-6, 12e-6), (7e-6, 15e-6)] {
            let g = CpwGeometry {
                center_width_m: w,
                gap_m: s,
                ..reference_geometry(11.45)
            };
            let p = cpw_line_params(&g, None).unwrap();
            assert_relative_eq!(p.eps_eff, 6.225, epsilon = 1e-9);
        }
    }

    #[test]
    fn thick_silicon_barely_moves_eps_eff() {
        let finite = CpwGeometry {
            substrate_thickness_m: Some(375e-6),
            ..reference_geometry(11.45)
        };
        let p = cpw_line_params(&finite, None).unwrap();
        assert_relative_eq!(p.eps_eff, 6.225, max_relative = 1e-3);
    }

    #[test]
    fn z0_decreases_with_wider_center_strip() {
        let mut prev = f64::INFINITY;
        for w in [4e-6, 8e-6, 12e-6, 16e-6] {
            let g = CpwGeometry { center_width_m: w, ..reference_geometry(11.45) };
            let p = cpw_line_params(&g, None).unwrap();
            assert!(p.z0_ohm < prev, "Z0 should fall as w/(w+2s) grows");
            prev = p.z0_ohm;
        }
    }

    #[test]
    fn kinetic_term_slows_and_stiffens_the_line() {
        let geom = reference_geometry(11.45);
        let bare = cpw_line_params(&geom, None).unwrap();
        let loaded = cpw_line_params(&geom, Some(0.2011e-12)).unwrap();
        assert!(loaded.l_per_m > bare.l_per_m);
        assert!(loaded.z0_ohm > bare.z0_ohm);
        assert!(loaded.phase_velocity_m_per_s < bare.phase_velocity_m_per_s);
        // same physical length resonates lower with the kinetic term
        let len = resonator_length(7e9, ResonatorMode::HalfWave, &bare).unwrap();
        let f_loaded = loaded.phase_velocity_m_per_s / (2.0 * len);
        assert!(f_loaded < 7e9);
    }

    #[test]
    fn resonator_lengths() {
        let p = cpw_line_params(&reference_geometry(11.45), None).unwrap();
        let half = resonator_length(7e9, ResonatorMode::HalfWave, &p).unwrap();
        assert_relative_eq!(half, 8.58e-3, epsilon = 0.01e-3);
        let quarter = resonator_length(7e9, ResonatorMode::QuarterWave, &p).unwrap();
        assert_relative_eq!(quarter, half / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn complementary_modulus_product() {
        // swapping k and k' inverts the impedance ratio: the product of
        // the two ratios is exactly 1
        for (w, s) in [(10e-6_f64, 6e-6_f64), (3e-6, 9e-6)] {
            let k = w / (w + 2.0 * s);
            let kp = (1.0 - k * k).sqrt();
            let r = elliptic_k(kp) / elliptic_k(k);
            let r_swapped = elliptic_k(k) / elliptic_k(kp);
            assert_relative_eq!(r * r_swapped, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut g = reference_geometry(11.45);
        g.gap_m = 0.0;
        assert!(cpw_line_params(&g, None).is_err());
        let mut g = reference_geometry(0.9);
        g.substrate_eps_r = 0.9;
        assert!(cpw_line_params(&g, None).is_err());
    }
}
