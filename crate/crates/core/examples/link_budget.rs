//! From pulse energy and losses to the mean photon number and the channel
//! survival probability.

use qkd_budget::cli::parse_config;
use qkd_budget::system::{
    channel_survival_probability, mean_photon_number, photon_energy, AttenuationMode,
};

fn main() -> qkd_budget::Result<()> {
    let mut config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    // Derive mu from the pulse energy instead of pinning it.
    config.source.mu_override = None;

    let hv = photon_energy(config.source.wavelength)?;
    println!("photon energy at {} m: {hv:.4e} J", config.source.wavelength);
    println!("pulse energy: {:.4e} J ({:.1} photons before the VOA)", config.source.pulse_energy, config.source.pulse_energy / hv);

    for mode in [AttenuationMode::OneWay, AttenuationMode::LoopBack] {
        config.engine.attenuation = mode;
        println!("{mode:?}: mu = {:.4}", mean_photon_number(&config)?);
    }

    config.engine.attenuation = AttenuationMode::OneWay;
    for km in [0.0, 10.0, 25.0, 50.0, 100.0] {
        config.path.channel_length_km = km;
        println!(
            "{km:>5} km: channel loss {:>5.1} dB, survival {:.4e}",
            config.path.channel_loss_db(),
            channel_survival_probability(&config)?
        );
    }
    Ok(())
}
