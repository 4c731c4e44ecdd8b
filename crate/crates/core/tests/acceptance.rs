//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropibayes::fixtures::{cubic_on_line, pentagon_pair};
use tropibayes::geometry::PlacingOrder;
use tropibayes::linalg::{format_rat, ln_rat, ratio};
use tropibayes::models::{coin_model, marginal_likelihood, Method, ModelSpec, PolytopeH};
use tropibayes::models::{bayes_factor, linear_model};
use tropibayes::sampler::{
    cubature_integral, draw_tropical, mc_estimate, mc_estimate_with, rejection_sample, stddev_bound,
};
use tropibayes::{cauchy_binet_check, SectorTable};

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(id.to_string());
        }
    }
}

fn cubic() -> SectorTable {
    let (x, f, g) = cubic_on_line();
    SectorTable::from_polys(&x, &f, &g).unwrap()
}

fn pentagon() -> SectorTable {
    let (x, f, g) = pentagon_pair();
    SectorTable::from_polys(&x, &f, &g).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn criterion_1(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    let (t, d) = timed(cubic);
    ok &= *t.trop_total() == ratio(3, 2) && d.as_secs_f64() < 5.0;
    parts.push(format!("cubic {} ({:.2}s)", format_rat(t.trop_total()), d.as_secs_f64()));
    let (t, d) = timed(pentagon);
    ok &= *t.trop_total() == ratio(37, 4) && d.as_secs_f64() < 5.0;
    parts.push(format!("pentagon {} ({:.2}s)", format_rat(t.trop_total()), d.as_secs_f64()));
    let (t, d) = timed(|| coin_model(2).unwrap().likelihood_table(&[2, 1, 2], None).unwrap());
    ok &= *t.trop_total() == ratio(40, 21) && t.len() == 32 && d.as_secs_f64() < 5.0;
    parts.push(format!("coin {} with {} sectors ({:.2}s)", format_rat(t.trop_total()), t.len(), d.as_secs_f64()));
    r.line("1 exact tropical integrals", ok, parts.join("; "));
}

fn criterion_2(r: &mut Report) {
    let start = Instant::now();
    let exact = (6.0 * 3f64.ln() - 5f64.ln()) / 56.0;
    let e = mc_estimate(&cubic(), 100_000, 0, threads()).unwrap();
    let v = e.value.unwrap();
    let se = e.stderr.unwrap();
    let ok1 = (v - exact).abs() <= 3.0 * se;
    let p = mc_estimate(&pentagon(), 10_000, 0, threads()).unwrap();
    let pv = p.value.unwrap();
    let ok2 = (pv - 2.8677596).abs() <= 0.02;
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "2 classical integrals",
        ok1 && ok2 && secs < 30.0,
        format!(
            "cubic I_N={v:.6} vs {exact:.6} (|err|={:.2e}, 3se={:.2e}); pentagon I_N={pv:.6} (|err vs 2.8677596|={:.4}, stderr={:.4}); {secs:.2}s",
            (v - exact).abs(),
            3.0 * se,
            (pv - 2.8677596).abs(),
            p.stderr.unwrap()
        ),
    );
}

fn criterion_3(r: &mut Report) {
    let t = pentagon();
    let (m1, m2) = t.h_bounds();
    let ok1 = *m1 == ratio(1, 24) && *m2 == ratio(10, 7);
    let b = stddev_bound(&t, 10_000);
    r.line(
        "3 bounds",
        ok1 && b <= 0.132,
        format!("h_bounds=({}, {}); stddev_bound(N=1e4)={b:.6} (limit 0.132)", format_rat(m1), format_rat(m2)),
    );
}

fn criterion_4(r: &mut Report) {
    let t = pentagon();
    let batch = rejection_sample(&t, 100_000, 0, threads()).unwrap();
    let rate = batch.acceptance_rate();
    let lower = batch.acceptance_lower_bound();
    r.line(
        "4 rejection sampling",
        (0.19..=0.25).contains(&rate) && rate >= lower,
        format!("acceptance {}/{} = {rate:.5}; M1/M2 = {lower:.5}", batch.num_accepted(), batch.len()),
    );
}

fn criterion_5(r: &mut Report) {
    let m = coin_model(2).unwrap();
    let u = [2, 1, 2];
    let exact = 2267.0 / 1559250.0;
    let mc = marginal_likelihood(&m, &u, Method::MonteCarlo { n: 50_000, seed: 0, threads: threads() }).unwrap();
    let cu = marginal_likelihood(&m, &u, Method::Cubature { nodes: 32 }).unwrap();
    let e1 = (mc.log_value.exp() - exact).abs() / exact;
    let e2 = (cu.log_value.exp() - exact).abs() / exact;
    r.line(
        "5 marginal likelihood",
        e1 <= 0.10 && e2 <= 0.01,
        format!(
            "mc I_N={:.6e} (rel err {e1:.4}); cubature {:.6e} (rel err {e2:.2e}); exact {exact:.6e}",
            mc.log_value.exp(),
            cu.log_value.exp()
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 1..=6usize {
        let model = coin_model(m).unwrap();
        let u: Vec<u32> = (0..=m as u32).map(|i| i + 1).collect();
        let p = model.likelihood_integrand(&u).unwrap().factor_polytope().unwrap();
        let (v, e, f) = (p.vertices().len(), p.edges().len(), p.facets().len());
        ok &= v == 8 * (m + 1) && e == 14 * m + 12 && f == 6 * (m + 1);
        parts.push(format!("m={m}: {v}/{e}/{f}"));
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "6 integrand polytope combinatorics",
        ok && secs < 60.0,
        format!("vertices/edges/facets {} ({secs:.2}s)", parts.join(", ")),
    );
}

fn criterion_7(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    let pent = linear_model(&PolytopeH::pentagon()).unwrap().prior_table().unwrap();
    let cube = coin_model(1).unwrap().prior_table().unwrap();
    for (name, t, vol) in [("pentagon", &pent, 2.5), ("cube", &cube, 1.0)] {
        let c = cubature_integral(t, 64).unwrap().value.unwrap();
        let e = mc_estimate(t, 100_000, 0, threads()).unwrap();
        let (v, se) = (e.value.unwrap(), e.stderr.unwrap());
        ok &= (c - vol).abs() <= 1e-3 && (v - vol).abs() <= 3.0 * se;
        parts.push(format!("{name}: cubature {c:.8}, mc {v:.5} ± {se:.5} (target {vol})"));
    }
    r.line("7 volumes via prior lift", ok, parts.join("; "));
}

fn criterion_8(r: &mut Report) {
    let lin = ModelSpec::builtin("pentagon-linear").unwrap();
    let a = marginal_likelihood(&lin, &[20, 16, 10, 15, 23], Method::Cubature { nodes: 64 }).unwrap();
    let da = (a.log_value - 9.652e-60f64.ln()).abs();
    let wach = ModelSpec::builtin("pentagon-wachspress").unwrap();
    // states ordered (p45, p51, p12, p23, p34)
    let b = marginal_likelihood(&wach, &[2, 3, 5, 7, 11], Method::Cubature { nodes: 64 }).unwrap();
    let db = (b.log_value - 1.218e-66f64.ln()).abs();
    r.line(
        "8 large-exponent integrals",
        da <= 0.05 && db <= 0.05,
        format!(
            "linear ln I_u={:.5} (|diff|={da:.5}); Wachspress ln I_u={:.5} vs {:.5} (|diff|={db:.3})",
            a.log_value,
            b.log_value,
            1.218e-66f64.ln()
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let m1 = ModelSpec::builtin("pentagon-toric(2,3,5,7,11,13)").unwrap();
    let m2 = ModelSpec::builtin("pentagon-toric(32,16,8,4,2,1)").unwrap();
    let k = bayes_factor(&m1, &m2, &[1, 2, 4, 8, 16, 32], Method::Cubature { nodes: 64 }).unwrap();
    let kv = k.log_k.exp();
    r.line(
        "9 Bayes factor",
        (19.0..=23.0).contains(&kv),
        format!("K={kv:.4}, I1={:.4e}, I2={:.4e}", k.first.log_value.exp(), k.second.log_value.exp()),
    );
}

fn criterion_10(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut parts = Vec::new();

    let mut cb = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=4usize);
        let k = rng.random_range(n..=7usize);
        let v: Vec<Vec<i64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(-5..=5)).collect()).collect();
        let w: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.random_range(-5..=5)).collect()).collect();
        cb &= cauchy_binet_check(&v, &w).unwrap();
    }
    parts.push(format!("Cauchy-Binet 200 pairs {}", ok_str(cb)));

    // F^tr/G^tr = t^{-δ} on each sector
    let tables = [cubic(), pentagon(), coin_model(2).unwrap().likelihood_table(&[2, 1, 2], None).unwrap()];
    let mut worst: f64 = 0.0;
    for t in &tables {
        let n = t.integrand().dim();
        for s in 0..t.len() {
            for _ in 0..50 {
                let q: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
                let y = t.cube_map_torus(s, &q).unwrap();
                let (_, trop) = t.integrand().log_value_and_trop(&y);
                let mono: f64 = -t.sectors()[s].delta().iter().zip(&y).map(|(a, b)| *a as f64 * b).sum::<f64>();
                worst = worst.max(((trop - mono).exp() - 1.0).abs());
            }
        }
    }
    let mono_ok = worst < 1e-10;
    parts.push(format!("monomial on sectors max rel err {worst:.1e}"));

    // ∫ d^tr over a box in log coordinates, by uniform Monte Carlo
    let mut norm_ok = true;
    for (t, half) in [(cubic(), 40.0f64), (pentagon(), 12.0)] {
        let n = t.integrand().dim();
        let log_total = ln_rat(t.trop_total());
        let draws = 100_000;
        let vol = (2.0 * half).powi(n as i32);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-half..half)).collect();
            let v = vol * (t.integrand().log_value_and_trop(&y).1 - log_total).exp();
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / draws as f64;
        let se = ((s2 / draws as f64 - mean * mean) / (draws as f64 - 1.0)).sqrt();
        norm_ok &= (mean - 1.0).abs() <= 3.0 * se;
        parts.push(format!("tropical mass {mean:.4} ± {se:.4}"));
    }

    // h within [M1, M2]
    let mut h_ok = true;
    for t in &tables[1..] {
        let (m1, m2) = t.h_bounds();
        let (l1, l2) = (ln_rat(m1), ln_rat(m2));
        for _ in 0..100_000 {
            let (_, y) = draw_tropical(t, &mut rng);
            let lh = t.integrand().log_h(&y);
            h_ok &= lh >= l1 - 1e-9 && lh <= l2 + 1e-9;
        }
    }
    parts.push(format!("h in [M1,M2] on 1e5 draws {}", ok_str(h_ok)));

    // two triangulations of the same fan
    let coin = coin_model(2).unwrap();
    let a = SectorTable::build_with(coin.likelihood_integrand(&[2, 1, 2]).unwrap(), PlacingOrder::Lex).unwrap();
    let b = SectorTable::build_with(coin.likelihood_integrand(&[2, 1, 2]).unwrap(), PlacingOrder::Rotated(2)).unwrap();
    let pent = pentagon();
    let stellar = pent.fan().stellar_subdivision(&[1, 1]).unwrap();
    let c = SectorTable::from_fan(pent.integrand().clone(), &stellar).unwrap();
    let refine_ok = a.fan().maximal_cones() != b.fan().maximal_cones()
        && a.trop_total() == b.trop_total()
        && c.len() > pent.len()
        && c.trop_total() == pent.trop_total();
    parts.push(format!(
        "refinement {} vs {}, {} vs {} {}",
        format_rat(a.trop_total()),
        format_rat(b.trop_total()),
        format_rat(pent.trop_total()),
        format_rat(c.trop_total()),
        ok_str(refine_ok)
    ));

    // seeds and thread counts
    let t = pentagon();
    let base = mc_estimate(&t, 20_000, 5, 1).unwrap().log_value;
    let mut seed_ok = [2, 3, 8].iter().all(|&k| mc_estimate(&t, 20_000, 5, k).unwrap().log_value.to_bits() == base.to_bits());
    let s1 = rejection_sample(&t, 5_000, 9, 1).unwrap();
    let s4 = rejection_sample(&t, 5_000, 9, 4).unwrap();
    seed_ok &= s1.samples == s4.samples;
    let w1 = mc_estimate_with(&t, 5_000, 1, 3, |_, y, lh| lh + y[0]).unwrap().log_value;
    let w2 = mc_estimate_with(&t, 5_000, 1, 7, |_, y, lh| lh + y[0]).unwrap().log_value;
    seed_ok &= w1.to_bits() == w2.to_bits();
    parts.push(format!("seed determinism across threads {}", ok_str(seed_ok)));

    r.line(
        "10 property suites",
        cb && mono_ok && norm_ok && h_ok && refine_ok && seed_ok,
        parts.join("; "),
    );
}

fn ok_str(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn main() {
    let mut r = Report { failures: Vec::new() };
    let all: [fn(&mut Report); 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    for c in all {
        c(&mut r);
    }
    if r.failures.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: {} failing: {}", r.failures.len(), r.failures.join(", "));
        std::process::exit(1);
    }
}
