use rand::Rng;

use super::link::{transmit_symbols, LinkConfig};
use super::TrialSeed;
use crate::modem::Constellation;
use crate::Result;

/// One post-combining decision statistic, normalized by the equivalent
/// channel gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRecord {
    pub index: usize,
    pub tx_label: usize,
    pub tx_re: f64,
    pub tx_im: f64,
    pub rx_re: f64,
    pub rx_im: f64,
    /// Variance of `rx − tx` for this symbol (total complex).
    pub noise_variance: f64,
}

/// Sends `n_symbols` uniformly random symbols through the space-time link
/// (no channel coding) and records the normalized combiner outputs. The
/// noise level is that of the full configured link at `ebn0_db`; `+inf`
/// or a noiseless config captures without noise.
pub fn constellation_capture(
    cfg: &LinkConfig,
    ebn0_db: f64,
    n_symbols: usize,
    seed: impl Into<TrialSeed>,
) -> Result<Vec<ScatterRecord>> {
    cfg.validate()?;
    if n_symbols == 0 {
        return Ok(Vec::new());
    }
    let c = Constellation::<f64>::new(cfg.order)?;
    let mut rng = seed.into().rng();
    let spb = cfg.stbc.symbols_per_block();
    let padded = n_symbols.div_ceil(spb) * spb;
    let labels: Vec<usize> = (0..padded)
        .map(|_| rng.random_range(0..c.order()))
        .collect();
    let symbols: Vec<_> = labels.iter().map(|&l| c.point(l)).collect();
    let noiseless = cfg.noiseless || ebn0_db == f64::INFINITY;
    let link = transmit_symbols(
        cfg,
        &c,
        &symbols,
        cfg.slot_snr(ebn0_db),
        noiseless,
        &mut rng,
    )?;
    Ok((0..n_symbols)
        .map(|i| ScatterRecord {
            index: i,
            tx_label: labels[i],
            tx_re: symbols[i].re,
            tx_im: symbols[i].im,
            rx_re: link.normalized[i].re,
            rx_im: link.normalized[i].im,
            noise_variance: if noiseless {
                0.0
            } else {
                link.noise_variances[i]
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ChannelModel;
    use crate::stbc::StbcScheme;

    #[test]
    fn noiseless_capture_lands_on_points() {
        for (stbc, n_rx) in [(StbcScheme::G2, 1), (StbcScheme::G3, 2)] {
            let cfg = LinkConfig::uncoded(
                16,
                stbc,
                n_rx,
                ChannelModel::Rayleigh { per_block: true },
                1,
            );
            let recs = constellation_capture(&cfg, f64::INFINITY, 501, 4).unwrap();
            assert_eq!(recs.len(), 501);
            for r in &recs {
                assert!((r.rx_re - r.tx_re).abs() < 1e-9 && (r.rx_im - r.tx_im).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_request() {
        let cfg = LinkConfig::uncoded(16, StbcScheme::G2, 1, ChannelModel::Awgn, 1);
        assert!(constellation_capture(&cfg, 10.0, 0, 1).unwrap().is_empty());
    }
}
