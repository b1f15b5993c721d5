//! Link budget and minimum upload bandwidth across cell distances.

use fedcgd::channel::{los_probability, ChannelParams, LinkState, MinBandwidth};

fn main() -> fedcgd::Result<()> {
    let params = ChannelParams::default();
    println!(
        "carrier {} GHz, budget {:.0} MHz, deadline {} s, model {:.2} Mbit",
        params.carrier_freq_ghz,
        params.total_bandwidth_hz / 1e6,
        params.deadline_s,
        params.model_bits / 1e6
    );
    println!("{:>6} {:>7} {:>5} {:>12} {:>12}", "d [m]", "P(LOS)", "LOS", "gain [dB]", "B* [MHz]");
    for d in [10.0, 25.0, 50.0, 100.0, 150.0, 200.0, 250.0] {
        for is_los in [true, false] {
            let link = LinkState::new(d, is_los, 0.0, &params)?;
            let bw = match link.min_bandwidth {
                MinBandwidth::Hz(hz) => format!("{:.3}", hz / 1e6),
                MinBandwidth::Infeasible => "infeasible".to_string(),
            };
            println!(
                "{:>6.0} {:>7.3} {:>5} {:>12.1} {:>12}",
                d,
                los_probability(d)?,
                if is_los { "yes" } else { "no" },
                10.0 * link.avg_gain.log10(),
                bw
            );
        }
    }
    Ok(())
}
