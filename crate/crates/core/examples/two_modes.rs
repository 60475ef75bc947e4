//! Sample a two-mode 1-d mixture and report how the particles split between the modes.
//!
//! cargo run --release -p rparvi --example two_modes -- [seed]

use rparvi::{mode_occupancy, run, HyperparameterInput, MixtureComponent, MixtureSpec, TargetDensity};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let target = TargetDensity::Mixture(MixtureSpec {
        components: vec![
            MixtureComponent { weight: 1.0, mean: vec![-2.0], std: 0.5 },
            MixtureComponent { weight: 1.0, mean: vec![2.0], std: 0.5 },
        ],
    });
    let hp = HyperparameterInput {
        seed: Some(seed),
        ..HyperparameterInput::new(1000, 1, 2000, 5.0)
    }
    .validate()
    .expect("valid hyperparameters");

    let result = run(&hp, &target).expect("run completes");
    let particles = result.final_system.to_rows();
    let centers = target.mode_centers().unwrap();
    let occupancy = mode_occupancy(&particles, &centers, 1.0);
    println!("seed {seed}");
    println!("occupancy at -2, +2: {:.3}, {:.3}", occupancy[0], occupancy[1]);
    println!(
        "mean reward: first 200 = {:.5}, last 200 = {:.5}",
        result.history.head_mean(200).unwrap(),
        result.history.tail_mean(200).unwrap()
    );
}
