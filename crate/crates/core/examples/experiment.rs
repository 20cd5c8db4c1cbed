//! A repeated comparison with a text report and plot-data files.

use flashtune::harness::{emit_plot_data, run_experiment, ExperimentSpec, MethodSpec};
use flashtune::synth::{generate_synthetic, SyntheticKind};

fn main() -> anyhow::Result<()> {
    let datasets = vec![
        generate_synthetic(SyntheticKind::SinglePeak, 9, 1)?.dataset,
        generate_synthetic(SyntheticKind::BiObjectiveTradeoff, 7, 1)?.dataset,
    ];
    let methods = vec![
        MethodSpec::Flash { size: 30, budget: 20, projections: 10 },
        MethodSpec::Progressive { lives: 3 },
        MethodSpec::Random { n: 50 },
        MethodSpec::Epal { epsilon: 0.3, init_size: 20, max_wall_time: None },
    ];
    let mut spec = ExperimentSpec::new(datasets, methods);
    spec.repeats = 10;
    let report = run_experiment(&spec)?;
    print!("{}", report.render());

    let out = std::env::temp_dir().join("flashtune-experiment");
    for path in emit_plot_data(&report, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
