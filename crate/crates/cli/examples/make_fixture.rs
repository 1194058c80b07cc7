//! Writes the synthetic test fixture: 100 seasons of 90 i.i.d. daily values
//! whose season maxima are GEV(0, 1, -0.2).
//!
//! `cargo run -p blockmax-cli --example make_fixture > crates/cli/tests/fixtures/gev_seasons.csv`

use blockmax::gev::{self, GevParams};
use blockmax::{rng, trend};

pub const SEASONS: usize = 100;
pub const R: usize = 90;
pub const SEED: u64 = 2024;

fn main() {
    let theta = GevParams::new(0.0, 1.0, -0.2).expect("valid parameters");
    let daily = trend::bootstrap_tilde_params(&theta, 0.0, 0.0, R);
    let values = gev::gev_sample(&daily, SEASONS * R, &mut rng::stream(SEED, &[]));
    println!("season_index,day_index,value");
    for (i, v) in values.iter().enumerate() {
        println!("{},{},{v:.16e}", i / R + 1, i % R + 1);
    }
}
