//! Closed-form link budget primitives: terrestrial and satellite path loss,
//! thermal noise, SINR and the spherical slant geometry of a LEO pass.

use tnntn::channel::{
    beam_gain_db, free_space_path_loss, hata_path_loss, noise_power_dbm, sinr_db,
    slant_geometry_from_ground, LinkSample, NtnParams, TnParams,
};

fn main() -> tnntn::Result<()> {
    let tn = TnParams::default();
    println!("terrestrial path loss at {:.1} GHz", tn.carrier_hz / 1e9);
    for d in [50.0, 250.0, 500.0, 1000.0, 2000.0] {
        println!("  {d:>6.0} m  {:7.2} dB", hata_path_loss(d, &tn)?);
    }

    // A cell-edge user with two equally strong neighbours.
    let pl = hata_path_loss(250.0, &tn)?;
    let serving = LinkSample::from_rx_dbm(tn.tx_power_dbm - pl);
    let neighbours = [
        LinkSample::from_rx_dbm(tn.tx_power_dbm - hata_path_loss(400.0, &tn)?),
        LinkSample::from_rx_dbm(tn.tx_power_dbm - hata_path_loss(450.0, &tn)?),
    ];
    println!(
        "noise {:.2} dBm, edge SINR {:.2} dB",
        tn.noise_dbm(),
        sinr_db(&serving, &neighbours, tn.noise_dbm())
    );

    let ntn = NtnParams::default();
    println!("\nsatellite at {:.0} km", ntn.altitude_m / 1e3);
    println!("  ground(km)  elev(deg)  slant(km)  FSPL(dB)  SNR(dB)");
    let noise = noise_power_dbm(ntn.bandwidth_hz, ntn.noise_figure_db);
    for g in [0.0, 200e3, 500e3, 1000e3, 1500e3] {
        let geo = slant_geometry_from_ground(g, ntn.altitude_m);
        let fspl = free_space_path_loss(geo.slant_range_m, ntn.carrier_hz)?;
        let snr = ntn.sat_eirp_dbm - fspl + ntn.ue_rx_gain_dbi - noise;
        println!(
            "  {:>9.0}  {:>9.2}  {:>9.1}  {:>8.2}  {:>7.2}",
            g / 1e3,
            geo.elevation_deg,
            geo.slant_range_m / 1e3,
            fspl,
            snr
        );
    }

    println!("\nspot-beam pattern ({}° half-power half-angle)", ntn.beam_half_power_deg);
    for theta in [0.0, 1.0, 2.6, 5.0, 10.0, 30.0] {
        let g = beam_gain_db(theta, ntn.beam_half_power_deg, ntn.beam_floor_db);
        println!("  {theta:>5.1}°  {g:7.2} dB");
    }
    Ok(())
}
