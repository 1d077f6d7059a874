//! Chebyshev coupled-resonator bandpass synthesis.
//!
//! From design targets `(poles N, center f_c, equiripple bandwidth B,
//! ripple)` the planner produces lowpass prototype values g_0..g_{N+1},
//! inter-resonator coupling coefficients k_{i,i+1} = FBW/sqrt(g_i g_{i+1}),
//! and external quality factors Qe_in = g_0 g_1 / FBW and
//! Qe_out = g_N g_{N+1} / FBW. Two circuit realizations are emitted:
//!
//! * `IdealInverter` - shunt LC resonators joined by ideal admittance
//!   inverters. A shunt LC has susceptance b (f/f0 - f0/f) exactly and
//!   the inverters are frequency-flat, so this network reproduces the
//!   closed-form equiripple response to solver precision at every
//!   frequency.
//! * `MutualInductive` - a chain of magnetically coupled resonators: the
//!   end resonators are series loops through the ports with inductance
//!   sized so the loaded Q equals Qe, interior resonators are grounded
//!   LC tanks, and adjacent inductor pairs carry K elements. Couplings
//!   scale as wM here, so the realized band detunes by a percent or two
//!   at these fractional bandwidths; [`synthesize`] closes that gap with
//!   a secant correction against simulated band metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{Element, Netlist, GROUND};
use crate::network::{self, BandReport};
use crate::numerics::linspace;

/// Bandpass design targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub poles: usize,
    pub f_center_hz: f64,
    /// Equiripple bandwidth (the band edges sit at the ripple level).
    pub bandwidth_hz: f64,
    pub ripple_db: f64,
    pub port_impedance_ohm: f64,
}

impl FilterSpec {
    pub fn new(
        poles: usize,
        f_center_hz: f64,
        bandwidth_hz: f64,
        ripple_db: f64,
        port_impedance_ohm: f64,
    ) -> Result<Self> {
        if poles == 0 {
            return Err(Error::Invalid("pole count must be at least 1".into()));
        }
        if !(f_center_hz > 0.0 && bandwidth_hz > 0.0) {
            return Err(Error::Invalid(
                "center frequency and bandwidth must be positive".into(),
            ));
        }
        let fbw = bandwidth_hz / f_center_hz;
        if fbw >= 0.5 {
            return Err(Error::Invalid(format!(
                "fractional bandwidth {fbw:.4} outside (0, 0.5)"
            )));
        }
        if ripple_db <= 0.0 {
            return Err(Error::Invalid("ripple must be positive".into()));
        }
        if port_impedance_ohm <= 0.0 {
            return Err(Error::Invalid("port impedance must be positive".into()));
        }
        Ok(Self { poles, f_center_hz, bandwidth_hz, ripple_db, port_impedance_ohm })
    }

    pub fn fractional_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.f_center_hz
    }
}

/// Synthesized realization values for a [`FilterSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPlan {
    pub poles: usize,
    pub f_center_hz: f64,
    pub bandwidth_hz: f64,
    pub ripple_db: f64,
    /// Lowpass prototype values g_0..g_{N+1}.
    pub g: Vec<f64>,
    /// Adjacent coupling coefficients k_{i,i+1}, length N-1.
    pub k_adj: Vec<f64>,
    pub qe_in: f64,
    pub qe_out: f64,
    pub resonators: Vec<Resonator>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonator {
    pub l_h: f64,
    pub c_f: f64,
}

/// Circuit topology used by [`realize_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizationMode {
    IdealInverter,
    MutualInductive,
}

impl std::str::FromStr for RealizationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" | "ideal_inverter" | "inverter" => Ok(RealizationMode::IdealInverter),
            "mutual" | "mutual_inductive" | "inductive" => Ok(RealizationMode::MutualInductive),
            other => Err(Error::Usage(format!("unknown realization mode '{other}'"))),
        }
    }
}

/// Lowpass Chebyshev prototype values g_0..g_{N+1} for a given passband
/// ripple. g_0 = 1; for odd N the load is 1, for even N it is
/// coth^2(beta/4) with beta = ln coth(ripple ln(10)/40).
pub fn chebyshev_prototype(poles: usize, ripple_db: f64) -> Vec<f64> {
    assert!(poles >= 1 && ripple_db > 0.0);
    let n = poles as f64;
    let beta = (ripple_db * std::f64::consts::LN_10 / 40.0).tanh().recip().ln();
    let gamma = (beta / (2.0 * n)).sinh();

    let a = |k: usize| ((2.0 * k as f64 - 1.0) * std::f64::consts::PI / (2.0 * n)).sin();
    let b = |k: usize| gamma * gamma + ((k as f64) * std::f64::consts::PI / n).sin().powi(2);

    let mut g = Vec::with_capacity(poles + 2);
    g.push(1.0);
    g.push(2.0 * a(1) / gamma);
    for k in 2..=poles {
        let prev = g[k - 1];
        g.push(4.0 * a(k - 1) * a(k) / (b(k - 1) * prev));
    }
    if poles % 2 == 0 {
        g.push((beta / 4.0).tanh().recip().powi(2));
    } else {
        g.push(1.0);
    }
    g
}

/// Coupling coefficients, external Q, and resonator L/C for a spec.
/// Every resonator uses the supplied inductance and resonates at the
/// center frequency.
pub fn coupling_plan(spec: &FilterSpec, resonator_inductance_h: f64) -> Result<CouplingPlan> {
    if resonator_inductance_h <= 0.0 {
        return Err(Error::Invalid("resonator inductance must be positive".into()));
    }
    let n = spec.poles;
    let fbw = spec.fractional_bandwidth();
    let g = chebyshev_prototype(n, spec.ripple_db);
    let k_adj: Vec<f64> = (1..n).map(|i| fbw / (g[i] * g[i + 1]).sqrt()).collect();
    let qe_in = g[0] * g[1] / fbw;
    let qe_out = g[n] * g[n + 1] / fbw;
    let w0 = 2.0 * std::f64::consts::PI * spec.f_center_hz;
    let resonators = (0..n)
        .map(|_| Resonator {
            l_h: resonator_inductance_h,
            c_f: 1.0 / (w0 * w0 * resonator_inductance_h),
        })
        .collect();
    Ok(CouplingPlan {
        poles: n,
        f_center_hz: spec.f_center_hz,
        bandwidth_hz: spec.bandwidth_hz,
        ripple_db: spec.ripple_db,
        g,
        k_adj,
        qe_in,
        qe_out,
        resonators,
    })
}

/// Emit a simulatable netlist for a coupling plan. Port 1 is the input,
/// port 2 the output; both see `port_impedance_ohm`.
pub fn realize_filter(
    plan: &CouplingPlan,
    mode: RealizationMode,
    port_impedance_ohm: f64,
) -> Result<Netlist> {
    for (i, k) in plan.k_adj.iter().enumerate() {
        if !(k.is_finite() && *k > 0.0 && *k < 1.0) {
            return Err(Error::Invalid(format!(
                "unrealizable coupling between resonators {},{}: k = {k}",
                i + 1,
                i + 2
            )));
        }
    }
    if plan.resonators.len() != plan.poles || plan.k_adj.len() + 1 != plan.poles {
        return Err(Error::Invalid("coupling plan is internally inconsistent".into()));
    }
    let netlist = match mode {
        RealizationMode::IdealInverter => realize_ideal(plan, port_impedance_ohm),
        RealizationMode::MutualInductive => realize_mutual(plan, port_impedance_ohm),
    };
    let diags = crate::netlist::validate_netlist(&netlist);
    if diags.is_empty() {
        Ok(netlist)
    } else {
        Err(Error::Invalid(format!(
            "synthesized netlist failed validation: {}",
            diags.join("; ")
        )))
    }
}

fn realize_ideal(plan: &CouplingPlan, z0: f64) -> Netlist {
    let w0 = 2.0 * std::f64::consts::PI * plan.f_center_hz;
    let mut n = Netlist::new(format!(
        "{}-pole chebyshev bandpass, ideal inverter realization",
        plan.poles
    ));
    let y0 = 1.0 / z0;
    // susceptance slope parameter of each shunt resonator
    let b: Vec<f64> = plan.resonators.iter().map(|r| w0 * r.c_f).collect();

    n.push(Element::Port { id: "P1".into(), n1: "in".into(), n2: GROUND.into(), z0, index: 1 });
    n.push(Element::Port { id: "P2".into(), n1: "out".into(), n2: GROUND.into(), z0, index: 2 });

    let node = |i: usize| format!("r{}", i + 1);
    for (i, res) in plan.resonators.iter().enumerate() {
        n.push(Element::Inductor {
            id: format!("L{}", i + 1),
            n1: node(i),
            n2: GROUND.into(),
            henries: res.l_h,
        });
        n.push(Element::Capacitor {
            id: format!("C{}", i + 1),
            n1: node(i),
            n2: GROUND.into(),
            farads: res.c_f,
        });
    }

    // port couplings sized from the external Q, interior ones from k
    n.push(Element::AdmittanceInverter {
        id: "J1".into(),
        n1: "in".into(),
        n2: node(0),
        siemens: (y0 * b[0] / plan.qe_in).sqrt(),
    });
    for (i, k) in plan.k_adj.iter().enumerate() {
        n.push(Element::AdmittanceInverter {
            id: format!("J{}", i + 2),
            n1: node(i),
            n2: node(i + 1),
            siemens: k * (b[i] * b[i + 1]).sqrt(),
        });
    }
    n.push(Element::AdmittanceInverter {
        id: format!("J{}", plan.poles + 1),
        n1: node(plan.poles - 1),
        n2: "out".into(),
        siemens: (y0 * b[plan.poles - 1] / plan.qe_out).sqrt(),
    });
    n
}

fn realize_mutual(plan: &CouplingPlan, z0: f64) -> Netlist {
    let w0 = 2.0 * std::f64::consts::PI * plan.f_center_hz;
    let mut n = Netlist::new(format!(
        "{}-pole chebyshev bandpass, mutual inductive realization",
        plan.poles
    ));
    let last = plan.poles - 1;

    n.push(Element::Port { id: "P1".into(), n1: "in".into(), n2: GROUND.into(), z0, index: 1 });
    n.push(Element::Port { id: "P2".into(), n1: "out".into(), n2: GROUND.into(), z0, index: 2 });

    for i in 0..plan.poles {
        let end = i == 0 || i == last;
        if end {
            // series loop through the port: the loop inductance realizes
            // the external Q exactly at f0 (Qe = w0 L / Z0)
            let qe = if i == 0 { plan.qe_in } else { plan.qe_out };
            let l = qe * z0 / w0;
            let c = 1.0 / (w0 * w0 * l);
            let port_node = if i == 0 { "in" } else { "out" };
            let mid = format!("m{}", i + 1);
            n.push(Element::Capacitor {
                id: format!("C{}", i + 1),
                n1: port_node.into(),
                n2: mid.clone(),
                farads: c,
            });
            n.push(Element::Inductor {
                id: format!("L{}", i + 1),
                n1: mid,
                n2: GROUND.into(),
                henries: l,
            });
        } else {
            // interior resonator: grounded LC tank
            let node = format!("m{}", i + 1);
            n.push(Element::Capacitor {
                id: format!("C{}", i + 1),
                n1: node.clone(),
                n2: GROUND.into(),
                farads: plan.resonators[i].c_f,
            });
            n.push(Element::Inductor {
                id: format!("L{}", i + 1),
                n1: node,
                n2: GROUND.into(),
                henries: plan.resonators[i].l_h,
            });
        }
    }
    for (i, k) in plan.k_adj.iter().enumerate() {
        n.push(Element::MutualCoupling {
            id: format!("K{}", i + 1),
            inductor_a: format!("L{}", i + 1),
            inductor_b: format!("L{}", i + 2),
            coefficient: *k,
        });
    }
    n
}

/// Closed-form equiripple attenuation oracle in dB:
/// `A(f) = 10 log10(1 + eps^2 T_N^2(Omega))` with
/// `Omega = (f/fc - fc/f)/FBW` and eps^2 = 10^(ripple/10) - 1.
pub fn chebyshev_attenuation_db(spec: &FilterSpec, f_hz: f64) -> f64 {
    assert!(f_hz > 0.0);
    let fbw = spec.fractional_bandwidth();
    let omega = (f_hz / spec.f_center_hz - spec.f_center_hz / f_hz) / fbw;
    let eps2 = 10f64.powf(spec.ripple_db / 10.0) - 1.0;
    let t = chebyshev_t(spec.poles, omega);
    10.0 * (1.0 + eps2 * t * t).log10()
}

/// Chebyshev polynomial of the first kind, cos form inside [-1, 1] and
/// cosh form outside.
fn chebyshev_t(order: usize, x: f64) -> f64 {
    let n = order as f64;
    if x.abs() <= 1.0 {
        (n * x.acos()).cos()
    } else {
        let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
        sign * (n * x.abs().acosh()).cosh()
    }
}

/// A realized design bundled with the measured response of its netlist.
#[derive(Debug, Clone)]
pub struct SynthesizedFilter {
    pub plan: CouplingPlan,
    pub netlist: Netlist,
    pub report: BandReport,
}

/// Full synthesis entry point: plan, realize, verify against simulated
/// band metrics, and (for realizations with frequency-dependent
/// couplings) apply a secant-style correction on the internal (f_c, B)
/// targets until the measured equiripple band hits the requested one to
/// 0.2%, in at most 5 rounds.
///
/// The measured center used by the correction is the geometric mean of
/// the equiripple band edges, which for the symmetric bandpass mapping
/// coincides with f_c. The arithmetic 3 dB midpoint carries a small
/// intrinsic offset (+0.2% at these bandwidths) and would drag the
/// design off its oracle if used as the correction target.
pub fn synthesize(
    spec: &FilterSpec,
    mode: RealizationMode,
    resonator_inductance_h: f64,
) -> Result<SynthesizedFilter> {
    let mut fc_internal = spec.f_center_hz;
    let mut bw_internal = spec.bandwidth_hz;
    let tol = 2e-3;
    let max_iter = if mode == RealizationMode::IdealInverter { 1 } else { 5 };

    let mut result: Option<SynthesizedFilter> = None;
    for round in 0..max_iter {
        let internal = FilterSpec::new(
            spec.poles,
            fc_internal,
            bw_internal,
            spec.ripple_db,
            spec.port_impedance_ohm,
        )?;
        let plan = coupling_plan(&internal, resonator_inductance_h)?;
        let netlist = realize_filter(&plan, mode, spec.port_impedance_ohm)?;
        let report = measure_band(&netlist, spec)?;

        let (fc_meas, bw_meas) =
            match (report.f_lower_ripple_hz, report.f_upper_ripple_hz, report.bandwidth_ripple_hz)
            {
                (Some(lo), Some(hi), Some(bw)) => ((lo * hi).sqrt(), bw),
                _ => (report.f_center_hz, report.bandwidth_3db_hz),
            };

        let err_f = fc_meas / spec.f_center_hz - 1.0;
        let err_b = bw_meas / spec.bandwidth_hz - 1.0;
        result = Some(SynthesizedFilter { plan, netlist, report });
        if mode == RealizationMode::IdealInverter
            || (err_f.abs() < tol && err_b.abs() < tol)
            || round + 1 == max_iter
        {
            break;
        }
        // multiplicative update: both maps are nearly proportional in
        // their own knob, so rescaling by measured/target converges in a
        // round or two
        fc_internal /= 1.0 + err_f;
        bw_internal /= 1.0 + err_b;
    }
    result.ok_or_else(|| Error::Numerics("synthesis produced no candidate".into()))
}

fn measure_band(netlist: &Netlist, spec: &FilterSpec) -> Result<BandReport> {
    let lo = (spec.f_center_hz - 1.1 * spec.bandwidth_hz).max(spec.f_center_hz * 0.2);
    let hi = spec.f_center_hz + 1.1 * spec.bandwidth_hz;
    let grid = linspace(lo, hi, 1201)?;
    let sweep = network::s_parameters(netlist, &grid)?;
    network::band_metrics_refined(&sweep, |f| {
        network::s_matrix_at(netlist, f).map(|s| s.s(2, 1))
    })
}
