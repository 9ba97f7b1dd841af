//! Regenerates `tests/fixtures/green_oracle.csv` from the filtered-Fourier
//! oracle. Run with `cargo run --release --example freeze_oracle`.

use std::fmt::Write as _;

use perilame::verification::checks::lattice_band_points;
use perilame::verification::oracle::oracle_green;
use perilame::verification::suite::fingerprint;
use perilame::{LameEnv, PeriodicityCell};

const CELLS: [[f64; 2]; 2] = [[1.0, 1.0], [2.0, 3.0]];
const OMEGAS: [f64; 3] = [0.5, 1.0, 4.0];
const POINTS: usize = 20;
const SEED: u64 = 31;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut out = String::from("fingerprint,q1,q2,omega,x1,x2,g11,g12,g21,g22,certificate\n");
    for q in CELLS {
        let cell = PeriodicityCell::new(&q)?;
        for omega in OMEGAS {
            let env = LameEnv::planar(omega)?;
            let fp = fingerprint(&format!("green-oracle cell={}x{} omega={omega}", q[0], q[1]));
            for x in lattice_band_points(&cell, POINTS, 0.1 * cell.min_edge(), f64::INFINITY, SEED) {
                let o = oracle_green(&x, &env, &cell, 1e-11)?;
                let g = o.value;
                writeln!(
                    out,
                    "{fp},{},{},{omega},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e}",
                    q[0], q[1], x[0], x[1], g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)], o.certificate
                )?;
            }
        }
    }
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/green_oracle.csv");
    std::fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}
