use medfam::codes::Coding;
use medfam::ideals::IdealTerm;
use medfam::med::{battery, membership_t};
use std::io::Write;
use std::time::Instant;

fn main() {
    let window: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    for gen in battery() {
        print!("{:<14} ", gen.name());
        std::io::stdout().flush().unwrap();
        let t = Instant::now();
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, window).unwrap();
        println!("{:>10?} in_t={:?}", t.elapsed(), v.is_in_t());
    }
}
