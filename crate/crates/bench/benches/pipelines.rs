use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ltft::frames::{FrameFilter, LtftFrame, LtftParams, PhasePoint, QuadratureConfig};
use ltft::pipelines::{run_mc_pipeline, SampleCount};
use ltft::signal::bandlimited_signal;
use ltft::{Frame, Nonlinearity, PhaseOpSpec, PipelineConfig};

fn filter_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_build");
    g.sample_size(10);
    for rate in [256.0, 1024.0] {
        let params = LtftParams::default_for_rate(rate);
        g.bench_with_input(BenchmarkId::from_parameter(rate), &params, |b, p| {
            b.iter(|| FrameFilter::for_rate(p, rate, &QuadratureConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn atom_analysis(c: &mut Criterion) {
    let rate = 4096.0;
    let frame = LtftFrame::new(LtftParams::default_for_rate(rate), rate).unwrap();
    let s = bandlimited_signal(4096, rate, rate / 4.0, 8, true, 1).unwrap();
    let mut g = c.benchmark_group("atom_analysis");
    // one point per band
    for omega in [50.0, 800.0, 1900.0] {
        let atom = frame.atom(&PhasePoint::new(0.0, omega, 5.0)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(omega), &atom, |b, a| b.iter(|| a.analyze(black_box(&s))));
    }
    g.finish();
}

fn mc_identity(c: &mut Criterion) {
    let rate = 1024.0;
    let frame = LtftFrame::new(LtftParams::default_for_rate(rate), rate).unwrap();
    let s = bandlimited_signal(1024, rate, rate / 4.0, 8, true, 2).unwrap();
    let mut g = c.benchmark_group("mc_identity");
    g.sample_size(10);
    for z in [4.0, 16.0, 64.0] {
        let cfg = PipelineConfig::default().with_samples(SampleCount::PerVolume(z));
        g.bench_with_input(BenchmarkId::from_parameter(z), &cfg, |b, cfg| {
            b.iter(|| run_mc_pipeline(&s, &frame, cfg, &PhaseOpSpec::Identity, &Nonlinearity::Identity).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, filter_build, atom_analysis, mc_identity);
criterion_main!(benches);
