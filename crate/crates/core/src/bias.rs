//! Packet-success bias: probability that a packet received at a given RSS
//! is decoded, for uncoded non-coherent BFSK.
//!
//! The chain is RSS (dBm) -> SNR against a noise reference -> bitwise SNR
//! `eb/n0` -> BER `1/2 exp(-eb/n0 / 2)` -> success `alpha (1 - beta BER)^M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{db_to_pow, pow_to_db, Scalar};

pub const DEFAULT_BANDWIDTH_HZ: f64 = 200e3;
pub const DEFAULT_BITRATE_HZ: f64 = 100e3;

/// Radio constants joining RSS in dBm to bitwise SNR.
///
/// `noise_ref_dbm` folds the thermal noise floor and the receiver noise
/// figure into one number; [`calibrate_noise_ref`] pins it from the
/// receiver sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget<T> {
    pub noise_ref_dbm: T,
    pub bitrate_hz: T,
    pub bandwidth_hz: T,
    pub sensitivity_dbm: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> Default for LinkBudget<T> {
    fn default() -> Self {
        LinkBudget {
            noise_ref_dbm: T::zero(),
            bitrate_hz: T::lit(DEFAULT_BITRATE_HZ),
            bandwidth_hz: T::lit(DEFAULT_BANDWIDTH_HZ),
            sensitivity_dbm: T::zero(),
            alpha: T::one(),
            beta: T::one(),
        }
    }
}

impl<T: Scalar> LinkBudget<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if !unit(self.alpha) {
            return Err(Error::domain("alpha", self.alpha));
        }
        if !unit(self.beta) {
            return Err(Error::domain("beta", self.beta));
        }
        if !(self.bitrate_hz > T::zero()) || self.bitrate_hz.is_infinite() {
            return Err(Error::domain("bitrate_hz", self.bitrate_hz));
        }
        if !(self.bandwidth_hz > T::zero()) || self.bandwidth_hz.is_infinite() {
            return Err(Error::domain("bandwidth_hz", self.bandwidth_hz));
        }
        if self.noise_ref_dbm.is_nan() {
            return Err(Error::domain("noise_ref_dbm", self.noise_ref_dbm));
        }
        if !self.sensitivity_dbm.is_finite() {
            return Err(Error::domain("sensitivity_dbm", self.sensitivity_dbm));
        }
        Ok(())
    }

    /// `10 log10(bandwidth / bitrate)`, the SNR-to-`eb/n0` offset in dB.
    pub fn processing_gain_db(&self) -> T {
        pow_to_db(self.bandwidth_hz / self.bitrate_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PacketRepr", into = "PacketRepr")]
pub struct PacketSpec {
    payload_bytes: u32,
}

impl PacketSpec {
    pub fn new(payload_bytes: u32) -> Result<Self> {
        bytes_to_m(i64::from(payload_bytes))?;
        Ok(PacketSpec { payload_bytes })
    }

    pub fn payload_bytes(&self) -> u32 {
        self.payload_bytes
    }

    /// Number of BFSK symbols per packet, `8 * payload_bytes`.
    pub fn m_bits(&self) -> u32 {
        8 * self.payload_bytes
    }
}

#[derive(Serialize, Deserialize)]
struct PacketRepr {
    payload_bytes: u32,
    #[serde(default, skip_deserializing)]
    m_bits: u32,
}

impl TryFrom<PacketRepr> for PacketSpec {
    type Error = Error;
    fn try_from(r: PacketRepr) -> Result<Self> {
        PacketSpec::new(r.payload_bytes)
    }
}

impl From<PacketSpec> for PacketRepr {
    fn from(p: PacketSpec) -> Self {
        PacketRepr {
            payload_bytes: p.payload_bytes,
            m_bits: p.m_bits(),
        }
    }
}

pub fn bytes_to_m(payload_bytes: i64) -> Result<u32> {
    if payload_bytes < 1 || payload_bytes > i64::from(u32::MAX / 8) {
        return Err(Error::domain("payload_bytes", payload_bytes));
    }
    Ok(8 * payload_bytes as u32)
}

/// Linear `eb/n0` for a packet received at `rss_dbm`.
pub fn rss_to_ebn0_linear<T: Scalar>(rss_dbm: T, lb: &LinkBudget<T>) -> T {
    let snr_db = rss_dbm - lb.noise_ref_dbm;
    db_to_pow(snr_db + lb.processing_gain_db())
}

/// Non-coherent BFSK bit error probability.
pub fn ber_bfsk<T: Scalar>(ebn0_linear: T) -> Result<T> {
    if ebn0_linear.is_nan() || ebn0_linear < T::zero() {
        return Err(Error::domain("eb/n0", ebn0_linear));
    }
    Ok(ber_unchecked(ebn0_linear))
}

fn ber_unchecked<T: Scalar>(ebn0_linear: T) -> T {
    T::lit(0.5) * (-ebn0_linear / T::lit(2.0)).exp()
}

/// `alpha (1 - beta ber)^M`, shared by [`fer`] and [`bias_w`].
pub fn packet_success<T: Scalar>(ber: T, m_bits: u32, alpha: T, beta: T) -> T {
    let per_bit = T::one() - beta * ber;
    alpha * per_bit.powi(m_bits as i32)
}

/// Frame error rate `1 - alpha (1 - beta ber)^M`.
pub fn fer<T: Scalar>(ber: T, m_bits: u32, alpha: T, beta: T) -> Result<T> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !unit(ber) {
        return Err(Error::domain("ber", ber));
    }
    if !unit(alpha) {
        return Err(Error::domain("alpha", alpha));
    }
    if !unit(beta) {
        return Err(Error::domain("beta", beta));
    }
    if m_bits == 0 {
        return Err(Error::domain("m_bits", 0));
    }
    Ok(T::one() - packet_success(ber, m_bits, alpha, beta))
}

/// Probability of decoding a packet received at `rss_dbm`.
pub fn bias_w<T: Scalar>(rss_dbm: T, lb: &LinkBudget<T>, pkt: &PacketSpec) -> T {
    let ber = ber_unchecked(rss_to_ebn0_linear(rss_dbm, lb));
    packet_success(ber, pkt.m_bits(), lb.alpha, lb.beta)
}

/// Solves for `noise_ref_dbm` so that packets of `pkt` at `sensitivity_dbm`
/// succeed with probability `target_psr`.
///
/// The returned budget carries `sensitivity_dbm`; every other field comes
/// from `lb_partial`.
pub fn calibrate_noise_ref<T: Scalar>(
    sensitivity_dbm: T,
    target_psr: T,
    pkt: &PacketSpec,
    lb_partial: &LinkBudget<T>,
) -> Result<LinkBudget<T>> {
    if !(target_psr > T::zero() && target_psr < T::one()) {
        return Err(Error::domain("target_psr", target_psr));
    }
    let lb = LinkBudget {
        sensitivity_dbm,
        ..*lb_partial
    };
    lb.validate()?;
    if !(lb.beta > T::zero()) {
        return Err(Error::Infeasible(
            "beta = 0 makes success independent of RSS".into(),
        ));
    }
    if target_psr >= lb.alpha {
        return Err(Error::Infeasible(format!(
            "target success {target_psr} is not below alpha = {}",
            lb.alpha
        )));
    }
    let m = T::from_u32(pkt.m_bits()).expect("m_bits fits scalar");
    // alpha (1 - beta P)^M = psr
    let ber = (T::one() - (target_psr / lb.alpha).powf(T::one() / m)) / lb.beta;
    if !(ber < T::lit(0.5)) {
        return Err(Error::Infeasible(format!(
            "target success {target_psr} is at or below the zero-SNR floor {}",
            packet_success(T::lit(0.5), pkt.m_bits(), lb.alpha, lb.beta)
        )));
    }
    let ebn0 = -T::lit(2.0) * (T::lit(2.0) * ber).ln();
    let noise_ref_dbm = sensitivity_dbm + lb.processing_gain_db() - pow_to_db(ebn0);
    Ok(LinkBudget { noise_ref_dbm, ..lb })
}

/// A success-probability weight as a function of RSS in dBm.
pub trait BiasFunction<T>: Sync {
    fn weight(&self, rss_dbm: T) -> T;
}

/// `w = 1`: every packet is observed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unbiased;

impl<T: Scalar> BiasFunction<T> for Unbiased {
    fn weight(&self, _rss_dbm: T) -> T {
        T::one()
    }
}

/// [`bias_w`] for a fixed link budget and packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBias<T> {
    pub link: LinkBudget<T>,
    pub packet: PacketSpec,
}

impl<T: Scalar> BiasFunction<T> for LinkBias<T> {
    fn weight(&self, rss_dbm: T) -> T {
        bias_w(rss_dbm, &self.link, &self.packet)
    }
}

/// Either no censoring or link-budget censoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Censoring<T> {
    None,
    Link(LinkBias<T>),
}

impl<T: Scalar> BiasFunction<T> for Censoring<T> {
    fn weight(&self, rss_dbm: T) -> T {
        match self {
            Censoring::None => T::one(),
            Censoring::Link(b) => b.weight(rss_dbm),
        }
    }
}
