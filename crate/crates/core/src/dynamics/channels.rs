//! Collapse channels of the Lindblad dissipator.

use super::operators::SparseOp;
use crate::model::{LevelScheme, NvParameters, Spin};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    /// e_0,m → g_k,m photon emission.
    Emission { k: usize, m: Spin },
    GroundVibronic,
    ExcitedVibronic,
    OpticalDephasing,
    SpinRelaxation,
    SpinDephasing,
    Intersystem,
    SingletDecay,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseChannel {
    pub label: String,
    pub kind: ChannelKind,
    /// Γ in s⁻¹.
    pub rate: f64,
    pub op: SparseOp,
}

impl CollapseChannel {
    pub fn new(label: impl Into<String>, kind: ChannelKind, rate: f64, op: SparseOp) -> Result<Self> {
        let label = label.into();
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("channel {label}: rate {rate} must be >= 0")));
        }
        Ok(Self { label, kind, rate, op })
    }
}

/// Emission rates γ_{k,m} (s⁻¹) indexed `[k][spin offset]`.
pub type EmissionRates = Vec<[f64; 3]>;

/// All 6n + 20 channels of the model.
pub fn build_channels(params: &NvParameters, emission: &EmissionRates) -> Result<Vec<CollapseChannel>> {
    let s: LevelScheme = params.scheme();
    let n = s.vibronic_levels();
    let d = s.dim();
    if emission.len() != n + 1 {
        return Err(Error::Assembly(format!(
            "expected emission rates for {} bands, got {}",
            n + 1,
            emission.len()
        )));
    }
    let mut ch = Vec::with_capacity(6 * n + 20);
    let mut push = |label: String, kind, rate, op| -> Result<()> {
        ch.push(CollapseChannel::new(label, kind, rate, op)?);
        Ok(())
    };

    for k in 0..=n {
        for m in Spin::ALL {
            push(
                format!("emission e0,{m} -> g{k},{m}"),
                ChannelKind::Emission { k, m },
                emission[k][m.offset()],
                SparseOp::transition(d, s.g(k, m), s.e(0, m)),
            )?;
        }
    }
    for k in 1..=n {
        for m in Spin::ALL {
            push(
                format!("vibronic g{k},{m} -> g{},{m}", k - 1),
                ChannelKind::GroundVibronic,
                params.vibronic.gamma_vib[k - 1],
                SparseOp::transition(d, s.g(k - 1, m), s.g(k, m)),
            )?;
        }
    }
    for m in Spin::ALL {
        push(
            format!("vibronic e1,{m} -> e0,{m}"),
            ChannelKind::ExcitedVibronic,
            params.optical.excited_vibronic_decay,
            SparseOp::transition(d, s.e(0, m), s.e(1, m)),
        )?;
    }
    push(
        "optical dephasing".into(),
        ChannelKind::OpticalDephasing,
        params.optical.dephasing,
        SparseOp::diagonal(d, (0..2).flat_map(|j| Spin::ALL.map(|m| (s.e(j, m), 1.0)))),
    )?;
    for m in [Spin::Plus, Spin::Minus] {
        push(
            format!("spin relaxation e0,{m} -> e0,0"),
            ChannelKind::SpinRelaxation,
            params.spin.relax_excited,
            SparseOp::transition(d, s.e(0, Spin::Zero), s.e(0, m)),
        )?;
    }
    for m in [Spin::Plus, Spin::Minus] {
        push(
            format!("spin relaxation g0,{m} -> g0,0"),
            ChannelKind::SpinRelaxation,
            params.spin.relax_ground,
            SparseOp::transition(d, s.g(0, Spin::Zero), s.g(0, m)),
        )?;
    }
    push(
        "spin dephasing e0".into(),
        ChannelKind::SpinDephasing,
        params.spin.dephase_excited,
        SparseOp::diagonal(d, [(s.e(0, Spin::Plus), 1.0), (s.e(0, Spin::Minus), -1.0)]),
    )?;
    push(
        "spin dephasing g0".into(),
        ChannelKind::SpinDephasing,
        params.spin.dephase_ground,
        SparseOp::diagonal(d, [(s.g(0, Spin::Plus), 1.0), (s.g(0, Spin::Minus), -1.0)]),
    )?;
    for m in Spin::ALL {
        let rate = if m == Spin::Zero {
            params.isc.to_singlet_zero
        } else {
            params.isc.to_singlet_pm
        };
        push(
            format!("isc e0,{m} -> s1"),
            ChannelKind::Intersystem,
            rate,
            SparseOp::transition(d, s.s1(), s.e(0, m)),
        )?;
    }
    for m in Spin::ALL {
        let rate = if m == Spin::Zero {
            params.isc.from_singlet_zero
        } else {
            params.isc.from_singlet_pm
        };
        push(
            format!("isc s0 -> g0,{m}"),
            ChannelKind::Intersystem,
            rate,
            SparseOp::transition(d, s.g(0, m), s.s0()),
        )?;
    }
    push(
        "singlet decay s1 -> s0".into(),
        ChannelKind::SingletDecay,
        params.isc.singlet_decay,
        SparseOp::transition(d, s.s0(), s.s1()),
    )?;
    debug_assert_eq!(ch.len(), 6 * n + 20);
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_count() {
        let p = NvParameters::default();
        let em = vec![[1e6; 3]; 8];
        assert_eq!(build_channels(&p, &em).unwrap().len(), 62);
        assert!(build_channels(&p, &vec![[1e6; 3]; 3]).is_err());
        let bad = vec![[-1.0; 3]; 8];
        assert!(matches!(build_channels(&p, &bad), Err(Error::Domain(_))));
    }
}
