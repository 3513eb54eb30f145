//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hyperres::bounds::{
    kirchhoff_eig_bounds, l1_norm_sandwich, resistance_eig_bound, resistance_eig_bound_coarse, strong_convexity_alpha,
    BOUND_SLACK,
};
use hyperres::graph::build_l1;
use hyperres::hd_laplacian::{hd_pinv_laplacian, penrose_residuals, HDMatrix};
use hyperres::hessian::{assemble_hessian, evaluate_target, fd_hessian_oracle, HessianMatrix, Method, Target};
use hyperres::resistance::{hd_kirchhoff, hd_resistance, kirchhoff, resistance};
use hyperres::{GraphContext, Perturbation, RealMatrix, WeightedGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SIZE: usize = 200;
const SEED: u64 = 0x5eed_2024;

struct Sample {
    graph: WeightedGraph,
    ctx: GraphContext,
    dx: Perturbation,
    pair: (usize, usize),
}

fn random_graph(rng: &mut ChaCha8Rng) -> WeightedGraph {
    let n = rng.gen_range(2..=12);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for k in 1..n {
        let (u, v) = (order[k], order[rng.gen_range(0..k)]);
        present[u][v] = true;
        present[v][u] = true;
        edges.push((u.min(v), u.max(v)));
    }
    let density: f64 = rng.gen_range(0.0..0.6);
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let weighted: Vec<_> = edges.into_iter().map(|(u, v)| (u, v, rng.gen_range(0.1..=10.0))).collect();
    WeightedGraph::new(n, &weighted).expect("generated graph is valid")
}

fn corpus() -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..CORPUS_SIZE)
        .map(|_| {
            let graph = random_graph(&mut rng);
            let dx = graph.weights().iter().map(|&x| x * rng.gen_range(-0.9..1.0)).collect();
            let n = graph.vertex_count();
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let ctx = GraphContext::new(&graph).expect("generated graph is connected");
            Sample { graph, ctx, dx: Perturbation::new(dx), pair: (i.min(j), i.max(j)) }
        })
        .collect()
}

/// Greedy matching on the edge list, with random nonzero weight changes on
/// the matched edges.
fn matching_perturbation(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Perturbation {
    let mut used = vec![false; g.vertex_count()];
    let mut dx = vec![0.0; g.edge_count()];
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            dx[k] = g.weights()[k] * rng.gen_range(0.1..0.9) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
    }
    Perturbation::new(dx)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn max_abs(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).amax()
}

fn permute(h: &RealMatrix, perm: &[usize]) -> RealMatrix {
    RealMatrix::from_fn(h.nrows(), h.ncols(), |r, c| h[(perm[r], perm[c])])
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn round4(m: &RealMatrix) -> RealMatrix {
    m.map(|x| {
        let r = (x * 1e4).round() / 1e4;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    })
}

fn k3_golden() -> Outcome {
    let start = Instant::now();
    // edges in the order {1,2}, {2,3}, {1,3}
    let k3 = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
    let ctx = GraphContext::new(&k3).unwrap();
    let golden =
        RealMatrix::from_row_slice(3, 3, &[0.5926, 0.1481, 0.1481, 0.1481, 0.1481, -0.0741, 0.1481, -0.0741, 0.1481]);
    let h12 = assemble_hessian(&ctx, Target::Resistance { i: 0, j: 1 }, Method::ClosedForm).unwrap();
    let mut ok = round4(&h12.matrix) == golden;
    let mut worst_eig: f64 = 0.0;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let h = assemble_hessian(&ctx, Target::Resistance { i, j }, Method::ClosedForm).unwrap();
        let (_, top) = h.extreme_eigs().unwrap();
        worst_eig = worst_eig.max((top - 0.6667).abs());
        let matches = permutations(3).iter().any(|p| round4(&permute(&h.matrix, p)) == golden);
        ok &= matches;
    }
    let elapsed = start.elapsed();
    ok &= worst_eig <= 5e-5 && elapsed < Duration::from_secs(1);
    Outcome::new(ok, format!("max |mu_max - 0.6667| = {worst_eig:.2e}, {elapsed:.2?}"))
}

fn k3_coarse() -> Outcome {
    let ctx = GraphContext::new(&WeightedGraph::complete(3)).unwrap();
    let coarse = resistance_eig_bound_coarse(&ctx);
    let h = assemble_hessian(&ctx, Target::Resistance { i: 0, j: 1 }, Method::ClosedForm).unwrap();
    let (_, top) = h.extreme_eigs().unwrap();
    Outcome::new((coarse - 0.8889).abs() <= 1e-4 && coarse >= top, format!("coarse = {coarse:.6}, observed = {top:.6}"))
}

/// Equality up to rounding in the eigensolver.
fn within_ulps(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * b.abs()
}

fn k4_golden() -> Outcome {
    let ctx = GraphContext::new(&WeightedGraph::complete(4)).unwrap();
    let h = assemble_hessian(&ctx, Target::Kirchhoff, Method::ClosedForm).unwrap();
    let edges = ctx.graph().edges();
    let golden = RealMatrix::from_fn(6, 6, |k, l| {
        let (a, b) = (edges[k], edges[l]);
        if k == l {
            0.5
        } else if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
            0.125
        } else {
            0.0
        }
    });
    let matches = permutations(6).iter().any(|p| round4(&permute(&h.matrix, p)) == golden);
    let (lo, hi) = h.extreme_eigs().unwrap();
    let bounds = kirchhoff_eig_bounds(&ctx);
    let ok = matches
        && (lo - 0.25).abs() <= 1e-9
        && (hi - 1.0).abs() <= 1e-9
        && within_ulps(bounds.0, 0.25)
        && within_ulps(bounds.1, 1.0);
    Outcome::new(ok, format!("eigs = ({lo:.12}, {hi:.12}), bounds = {bounds:?}"))
}

fn penrose_suite(corpus: &[Sample]) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for s in corpus {
        let ctx = GraphContext::new(&s.graph).unwrap();
        let l1 = build_l1(&s.graph, &s.dx).unwrap();
        let a = HDMatrix::laplacian(ctx.laplacian().clone(), l1.clone());
        let x = hd_pinv_laplacian(&ctx, &l1).unwrap();
        worst = worst.max(penrose_residuals(&a, &x).unwrap().max());
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("max residual = {worst:.2e}, {elapsed:.2?}"),
    )
}

fn central_gradient(g: &WeightedGraph, target: Target) -> Vec<f64> {
    (0..g.edge_count())
        .map(|k| {
            let h = 1e-5 * g.weights()[k];
            let shifted = |s: f64| {
                let mut w = g.weights().to_vec();
                w[k] += s;
                evaluate_target(&g.with_weights(&w).unwrap(), target).unwrap()
            };
            (shifted(h) - shifted(-h)) / (2.0 * h)
        })
        .collect()
}

fn hd_gradient(s: &Sample, target: Target) -> Vec<f64> {
    let m = s.graph.edge_count();
    (0..m)
        .map(|k| {
            let e = Perturbation::unit(m, k);
            match target {
                Target::Kirchhoff => hd_kirchhoff(&s.ctx, &e).unwrap().value.eps,
                Target::Resistance { i, j } => hd_resistance(&s.ctx, &e, i, j).unwrap().value.eps,
            }
        })
        .collect()
}

fn derivative_oracle(corpus: &[Sample]) -> Outcome {
    let mut worst_hess: f64 = 0.0;
    let mut worst_at = String::new();
    let mut worst_grad: f64 = 0.0;
    let mut failures = 0;
    for (idx, s) in corpus.iter().enumerate() {
        let (i, j) = s.pair;
        for target in [Target::Kirchhoff, Target::Resistance { i, j }] {
            let cf = assemble_hessian(&s.ctx, target, Method::ClosedForm).unwrap();
            let pol = assemble_hessian(&s.ctx, target, Method::Polarization).unwrap();
            let fd: HessianMatrix = fd_hessian_oracle(&s.graph, target, Some(1e-4)).unwrap();
            let d = cf.max_abs_diff(&pol).max(cf.max_abs_diff(&fd)).max(pol.max_abs_diff(&fd));
            if d > 1e-4 {
                failures += 1;
            }
            if d > worst_hess {
                worst_hess = d;
                worst_at = format!("graph #{idx} {target}, min weight {:.3}", s.graph.min_weight());
            }

            let hd = hd_gradient(s, target);
            let fdg = central_gradient(&s.graph, target);
            let scale = fdg.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let err = hd.iter().zip(&fdg).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            if scale > 0.0 {
                worst_grad = worst_grad.max(err / scale);
            }
        }
    }
    Outcome::new(
        worst_hess <= 1e-4 && worst_grad <= 1e-6,
        format!(
            "max Hessian diff = {worst_hess:.2e} ({worst_at}; {failures} target(s) over 1e-4), \
             max gradient rel err = {worst_grad:.2e}"
        ),
    )
}

fn bound_suite(corpus: &[Sample]) -> Outcome {
    let mut worst_slack = f64::INFINITY;
    let mut sandwich_ok = true;
    for s in corpus {
        let ctx = &s.ctx;
        let n = ctx.n();
        let coarse = resistance_eig_bound_coarse(ctx);
        for i in 0..n {
            for j in i + 1..n {
                let h = assemble_hessian(ctx, Target::Resistance { i, j }, Method::ClosedForm).unwrap();
                let (lo, hi) = h.extreme_eigs().unwrap();
                let bound = resistance_eig_bound(ctx, i, j).unwrap();
                worst_slack = worst_slack.min(lo).min(bound - hi).min(coarse - hi);
            }
        }
        let h = assemble_hessian(ctx, Target::Kirchhoff, Method::ClosedForm).unwrap();
        let (lo, hi) = h.extreme_eigs().unwrap();
        let (klo, khi) = kirchhoff_eig_bounds(ctx);
        worst_slack = worst_slack.min(lo - klo).min(khi - hi);
        sandwich_ok &= l1_norm_sandwich(&s.graph, &s.dx).unwrap().holds;
    }
    Outcome::new(
        worst_slack >= -BOUND_SLACK && sandwich_ok,
        format!("min slack = {worst_slack:.3e}, sandwich holds on all samples: {sandwich_ok}"),
    )
}

fn sandwich_matching_equality(corpus: &[Sample]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xa11);
    let mut worst_ratio: f64 = 1.0;
    let mut equal = 0;
    for s in corpus {
        let p = matching_perturbation(&s.graph, &mut rng);
        assert!(s.graph.is_matching(&p));
        let sw = l1_norm_sandwich(&s.graph, &p).unwrap();
        if (sw.value - sw.lower).abs() <= 1e-9 * sw.lower.max(1.0) {
            equal += 1;
        }
        worst_ratio = worst_ratio.max(sw.value / sw.lower);
    }
    Outcome::new(
        equal == corpus.len(),
        format!(
            "lower bound attained on {equal}/{} matching perturbations; max value/lower = {worst_ratio:.6}",
            corpus.len()
        ),
    )
}

fn strong_convexity(corpus: &[Sample]) -> Outcome {
    let mut worst = f64::INFINITY;
    for s in corpus {
        let n = s.ctx.n();
        let h = assemble_hessian(&s.ctx, Target::Kirchhoff, Method::ClosedForm).unwrap();
        let (lo, _) = h.extreme_eigs().unwrap();
        for cap in [s.graph.max_weight(), 10.0] {
            let alpha = strong_convexity_alpha(n, cap).unwrap();
            worst = worst.min(lo - alpha);
        }
    }
    Outcome::new(worst >= -1e-12, format!("min (mu_min - alpha) = {worst:.3e}"))
}

fn consistency(corpus: &[Sample]) -> Outcome {
    let mut half_sum: f64 = 0.0;
    let mut identity: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    for s in corpus {
        let ctx = &s.ctx;
        let n = ctx.n();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += resistance(ctx, i, j).unwrap();
            }
        }
        half_sum = half_sum.max((kirchhoff(ctx) - 0.5 * sum).abs());

        let jn = RealMatrix::from_element(n, n, 1.0 / n as f64);
        let shifted = (ctx.laplacian() + &jn).try_inverse().unwrap() - jn;
        identity = identity.max(max_abs(ctx.pinv(), &shifted));

        let (i, j) = s.pair;
        let r = resistance(ctx, i, j).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let w: Vec<f64> = s.graph.weights().iter().map(|x| c * x).collect();
            let scaled = GraphContext::new(&s.graph.with_weights(&w).unwrap()).unwrap();
            scaling = scaling.max((resistance(&scaled, i, j).unwrap() - r / c).abs());
        }
    }
    let mut complete: f64 = 0.0;
    for n in 2..=8 {
        let ctx = GraphContext::new(&WeightedGraph::complete(n)).unwrap();
        complete = complete.max((kirchhoff(&ctx) - (n - 1) as f64).abs());
    }
    Outcome::new(
        half_sum <= 1e-8 && complete <= 1e-8 && identity <= 1e-8 && scaling <= 1e-10,
        format!(
            "Kf-half-sum {half_sum:.1e}, Kf(K_n) {complete:.1e}, shifted inverse {identity:.1e}, scaling {scaling:.1e}"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("hyperres-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let graph: PathBuf = dir.join("k3.txt");
    let pert: PathBuf = dir.join("e1.txt");
    fs::write(&graph, "3\n1 2 1\n1 3 1\n2 3 1\n").unwrap();
    fs::write(&pert, "1 2 1\n").unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hyperres"))
            .args(["check", "--format", "json", "--graph"])
            .arg(&graph)
            .arg("--perturbation")
            .arg(&pert)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let _ = fs::remove_dir_all(&dir);
    let ok = a.status.code() == Some(0) && b.status.code() == Some(0) && a.stdout == b.stdout && !a.stdout.is_empty();
    Outcome::new(ok, format!("exit codes {:?}/{:?}, {} bytes", a.status.code(), b.status.code(), a.stdout.len()))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1  K3 golden Hessian", Box::new(k3_golden)),
        ("2  K3 coarse bound", Box::new(k3_coarse)),
        ("3  K4 golden Hessian", Box::new(k4_golden)),
        ("4  Penrose suite", Box::new(|| penrose_suite(&corpus))),
        ("5  derivative oracle", Box::new(|| derivative_oracle(&corpus))),
        ("6a eigenvalue bounds", Box::new(|| bound_suite(&corpus))),
        ("6b sandwich equality on matchings", Box::new(|| sandwich_matching_equality(&corpus))),
        ("7  strong convexity", Box::new(|| strong_convexity(&corpus))),
        ("8  consistency identities", Box::new(|| consistency(&corpus))),
        ("9  CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
