//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use cahom_cli::{comonad_report, random_dist_samples, random_timed_samples, run};
use cahom_core::games::{backward_induction, GameSpec, Node};
use cahom_core::lsystem::{
    approximate, builtin, check_rule, check_wfr, concat, eval_point, sample_curve, span_dir, Entry, Rule, Turn,
};
use cahom_core::markov::{self, canonical_solution, classify, stationary, MarkovChain, Matrix};
use cahom_core::schemes::{check_ca_square, check_dist_monad_laws, check_timed_monad_laws};
use cahom_core::timed::{
    check_action_square, instantiate, oscillator_action, series_coalgebra, solve, verify_solution, ClassParams,
    Deltas, MonoidId, TimedCoalgebra,
};
use num::rational::Ratio;
use num::{BigInt, BigRational};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn within(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

// 1 -----------------------------------------------------------------------

fn koch_points() -> Outcome {
    let koch = builtin("koch").unwrap();
    let at = |n, d| eval_point(&koch, "K", &q(n, d), 1e-9).map_err(|e| e.to_string());
    let (p0, p1, apex) = (at(0, 1)?, at(1, 1)?, at(1, 2)?);
    ensure(p0.value == [0.0, 0.0] && p0.exact, || format!("h(0) = {:?}", p0.value))?;
    ensure(p1.value == [1.0, 0.0] && p1.exact, || format!("h(1) = {:?}", p1.value))?;

    // Hand trace: z = 1/2 lands on the end of the second segment, at
    // (e + rot60 e) / 3.
    let hand = [(1.0 + 0.5) / 3.0, 3f64.sqrt() / 2.0 / 3.0];
    ensure(within(apex.value, hand, 1e-9), || format!("h(1/2) = {:?}, hand trace {hand:?}", apex.value))?;
    ensure((apex.value[1] - 0.288_675_134_5).abs() < 1e-9, || format!("apex height {}", apex.value[1]))?;

    // Brute-force oracle: recursive drawing of the stroke to depth 30.
    for (z, p) in [(0.0, p0.value), (1.0, p1.value), (0.5, apex.value)] {
        let deep = approximate(&koch, "K", z, 30);
        ensure(within(p, deep, 1e-9), || format!("z = {z}: {p:?} vs deep sample {deep:?}"))?;
    }
    Ok(format!("h(1/2) = ({:.10}, {:.10})", apex.value[0], apex.value[1]))
}

// 2 -----------------------------------------------------------------------

fn render(name: &str, start: &str) -> Outcome {
    let started = Instant::now();
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let svg = dir.path().join(format!("{name}.svg"));
    let svg_arg = svg.to_str().unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["cahom", "lsystem", "render", "--builtin", name, "--samples", "666", "--json", "--out", svg_arg];
    let code = run(args, &mut out, &mut err);
    ensure(code == 0, || format!("exit {code}: {}", String::from_utf8_lossy(&err)))?;
    let circles = std::fs::read_to_string(&svg).map_err(|e| e.to_string())?.matches("<circle").count();
    ensure(circles == 667, || format!("{circles} circles in the SVG"))?;

    let summary: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let exact = summary["exact"].as_u64().unwrap_or(0);
    ensure(exact as f64 >= 0.99 * 667.0, || format!("only {exact} of 667 points exact"))?;

    // Baseline: the same grid drawn by brute-force recursion to depth 40,
    // well below double precision.
    let took = started.elapsed();
    ensure(took < Duration::from_secs(10), || format!("render took {took:.2?}"))?;
    let sys = builtin(name).unwrap();
    let sample = sample_curve(&sys, start, 666, 1e-9, false).map_err(|e| e.to_string())?;
    let b = sample.bound;
    let mut worst: f64 = 0.0;
    for (k, p) in sample.points.iter().enumerate() {
        let base = approximate(&sys, start, k as f64 / 666.0, 40);
        let dist = ((p.value[0] - base[0]).powi(2) + (p.value[1] - base[1]).powi(2)).sqrt();
        worst = worst.max(dist);
        ensure(p.error_bound <= b * 1e-9 + 1e-18, || format!("point {k}: bound {} too large", p.error_bound))?;
        ensure(dist <= p.error_bound + 1e-9, || {
            format!("point {k}: {:?} is {dist:e} from the baseline {base:?}", p.value)
        })?;
        ensure(p.value[0].hypot(p.value[1]) <= b, || format!("point {k} outside |h| <= B = {b}"))?;
    }
    Ok(format!("{name} {exact}/667 exact, max deviation {worst:.1e}, B = {b}"))
}

fn figures() -> Outcome {
    Ok(format!("{}; {}", render("koch", "K")?, render("sierpinski", "U")?))
}

// 3 -----------------------------------------------------------------------

fn random_word(rng: &mut StdRng) -> Vec<Entry> {
    let len = rng.gen_range(1..12);
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => Entry::Turn(Turn::from_degrees(Ratio::from_integer(15 * rng.gen_range(-12..=12)))),
            1 => Entry::Turn(Turn::from_degrees(Ratio::new(rng.gen_range(-360..=360), rng.gen_range(1..8)))),
            _ => Entry::Symbol(["A", "B", "C"][rng.gen_range(0..3)].to_string()),
        })
        .collect()
}

/// Independent span: accumulate the heading in degrees and add unit steps.
fn oracle_span(word: &[Entry]) -> ([f64; 2], f64) {
    let (mut pos, mut heading) = ([0.0, 0.0], 0.0f64);
    for e in word {
        match e {
            Entry::Turn(t) => {
                let d = t.degrees();
                heading += *d.numer() as f64 / *d.denom() as f64;
            }
            Entry::Symbol(_) => {
                let (s, c) = heading.to_radians().sin_cos();
                pos = [pos[0] + c, pos[1] + s];
            }
        }
    }
    (pos, heading.rem_euclid(360.0))
}

/// `t`, undo its heading, `t` mirrored, restore: a rule with span on the x axis
/// and identity direction.
fn balanced(t: &[Entry]) -> Vec<Entry> {
    let (_, d) = span_dir(t);
    let mut body = t.to_vec();
    body.push(Entry::Turn(d.inverse()));
    body.extend(t.iter().map(|e| match e {
        Entry::Turn(r) => Entry::Turn(r.inverse()),
        other => other.clone(),
    }));
    body.push(Entry::Turn(d));
    body
}

fn well_formedness() -> Outcome {
    let koch = check_wfr(&builtin("koch").unwrap());
    ensure(koch.len() == 1 && koch[0].well_formed(), || format!("{koch:?}"))?;
    ensure(koch[0].shrink == 3.0 && within(koch[0].span, [3.0, 0.0], 1e-9), || format!("{koch:?}"))?;
    let sierp = check_wfr(&builtin("sierpinski").unwrap());
    ensure(sierp.len() == 2, || format!("{sierp:?}"))?;
    for r in &sierp {
        ensure(r.well_formed() && r.shrink == 2.0 && within(r.span, [2.0, 0.0], 1e-9), || format!("{r:?}"))?;
        ensure(r.dir == Turn::identity(), || format!("{}: dir {}", r.rule, r.dir))?;
    }

    let mut rng = StdRng::seed_from_u64(3);
    let mut wfr_pairs = 0;
    for i in 0..1000 {
        let (t, u) = (random_word(&mut rng), random_word(&mut rng));
        let (st, dt) = span_dir(&t);
        let (su, du) = span_dir(&u);
        let tu: Vec<Entry> = t.iter().chain(&u).cloned().collect();
        let (s, d) = span_dir(&tu);

        let (os, oh) = oracle_span(&tu);
        ensure(within(s, os, 1e-9), || format!("pair {i}: span {s:?} vs oracle {os:?}"))?;
        let dh = d.degrees();
        let dh = (*dh.numer() as f64 / *dh.denom() as f64).rem_euclid(360.0);
        let gap = (dh - oh).abs();
        ensure(gap.min(360.0 - gap) < 1e-9, || format!("pair {i}: dir {d} vs oracle {oh}"))?;

        let r = dt.rotate(su);
        ensure(within(s, [st[0] + r[0], st[1] + r[1]], 1e-9), || format!("pair {i}: span not additive"))?;
        ensure(d == dt.compose(du), || format!("pair {i}: dir not additive"))?;

        let rule = |body: Vec<Entry>| Rule { shrink: span_dir(&body).0[0], body };
        let (a, b) = (rule(balanced(&t)), rule(balanced(&u)));
        if a.shrink > 1.0 && b.shrink > 1.0 {
            wfr_pairs += 1;
            ensure(check_rule("a", &a).well_formed() && check_rule("b", &b).well_formed(), || {
                format!("pair {i}: balanced rules not well-formed")
            })?;
            ensure(check_rule("ab", &concat(&a, &b)).well_formed(), || format!("pair {i}: concatenation"))?;
        }
    }
    Ok(format!("builtins well-formed; 1000 pairs additive, {wfr_pairs} well-formed concatenations"))
}

// 4 -----------------------------------------------------------------------

/// Consistency by walking each state onto its cycle and summing the
/// delays around it.
fn oracle_consistent(e: &TimedCoalgebra) -> bool {
    let n = e.len();
    (0..n).all(|x| {
        let mut y = x;
        for _ in 0..n {
            y = e.spec(y).1;
        }
        let (mut total, mut z) = (0.0, y);
        loop {
            let (t, p) = e.spec(z);
            total += t;
            z = p;
            if z == y {
                break;
            }
        }
        total == 0.0
    })
}

fn random_coalgebra(monoid: MonoidId, rng: &mut StdRng) -> TimedCoalgebra {
    let n = rng.gen_range(1..=20);
    let spec: Vec<(f64, usize)> = if rng.gen_bool(0.5) {
        // Built from potentials, hence consistent.
        let pot: Vec<i64> = (0..n).map(|_| rng.gen_range(0..10)).collect();
        (0..n)
            .map(|x| {
                let allowed: Vec<usize> = (0..n).filter(|&y| monoid == MonoidId::Z || pot[y] <= pot[x]).collect();
                let y = allowed[rng.gen_range(0..allowed.len())];
                ((pot[x] - pot[y]) as f64, y)
            })
            .collect()
    } else {
        let lo = if monoid == MonoidId::Z { -2 } else { 0 };
        (0..n).map(|_| (rng.gen_range(lo..=2) as f64, rng.gen_range(0..n))).collect()
    };
    TimedCoalgebra::from_indices(monoid, &spec).unwrap()
}

fn timed_soundness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut solved, mut rejected) = (0, 0);
    for i in 0..1000 {
        let monoid = if i % 2 == 0 { MonoidId::Z } else { MonoidId::N };
        let e = random_coalgebra(monoid, &mut rng);
        let expected = oracle_consistent(&e);
        let sol = match solve(&e) {
            Ok(sol) => sol,
            Err(err) => {
                ensure(!expected, || format!("case {i}: solve failed on a consistent coalgebra: {err}"))?;
                rejected += 1;
                continue;
            }
        };
        ensure(expected, || format!("case {i}: solved an inconsistent coalgebra"))?;
        solved += 1;
        let params: Vec<(f64, usize)> = (0..sol.classes.len()).map(|c| (rng.gen_range(0..5) as f64, c)).collect();
        let inst = sol.instance(&params).map_err(|e| e.to_string())?;
        if monoid == MonoidId::N {
            ensure(inst.iter().all(|(t, _)| *t >= 0.0), || format!("case {i}: negative delay over N"))?;
        }
        let report = verify_solution(&e, &inst);
        ensure(report.passed, || format!("case {i}: verify_solution {:?}", report.failures))?;

        // The same square spelled out directly.
        let carrier: Vec<usize> = (0..e.len()).collect();
        let square = check_ca_square::<_, _, _, _, ()>(
            &carrier,
            |x| x.to_string(),
            |&x| e.spec(x),
            |&(t, p), h| (t, h(&p)),
            |&(t, (u, y)): &(f64, (f64, usize))| Ok((t + u, y)),
            |&x| inst[x],
            |a, b| a == b,
        )
        .unwrap();
        ensure(square.passed && square.total_points == e.len(), || format!("case {i}: square {:?}", square.failures))?;
    }
    Ok(format!("{solved} solved, {rejected} inconsistent"))
}

// 5 -----------------------------------------------------------------------

fn oscillator() -> Outcome {
    let e = series_coalgebra(1, &Deltas::Constant(TAU), -5..=5, MonoidId::R).map_err(|e| e.to_string())?;
    let sol = solve(&e).map_err(|e| e.to_string())?;
    let action = oscillator_action(1.0, 1.0).map_err(|e| e.to_string())?;
    let params = vec![
        ClassParams {
            shift: 0.3,
            target: vec![1.0, 0.5],
        };
        sol.classes.len()
    ];
    let h = instantiate(&sol, &params, &action).map_err(|e| e.to_string())?;
    ensure(h.len() == 11, || format!("{} states", h.len()))?;
    let spread = h
        .iter()
        .flat_map(|v| v.iter().zip(&h[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    ensure(spread < 1e-6, || format!("values differ by {spread:e}: {h:?}"))?;
    let report = check_action_square(&e, &h, &action, 1e-9);
    ensure(report.passed, || format!("{:?}", report.failures))?;
    Ok(format!("11 values agree within {spread:.1e}"))
}

// 6 -----------------------------------------------------------------------

fn zeno() -> Outcome {
    let want = 1.0 - 2f64.powi(-20);
    let deltas = Deltas::zeno(20);
    let e = series_coalgebra(3, &deltas, 0..=20, MonoidId::R).map_err(|e| e.to_string())?;
    let sol = solve(&e).map_err(|e| e.to_string())?;
    let x20 = e.index_of("20").unwrap();
    let t20 = sol.offset(x20).ok_or("state 20 has no offset")?;
    ensure(t20 == want, || format!("t20 = {t20:e}, want {want:e}"))?;
    let partial = deltas.partial_sum(20).ok_or("partial sum undefined")?;
    ensure(partial == want, || format!("partial sum {partial:e}"))?;
    Ok(format!("t20 = {t20}"))
}

// 7 -----------------------------------------------------------------------

fn random_chain(rng: &mut StdRng) -> MarkovChain {
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|i| {
            let w: Vec<f64> = (0..5).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let mut row: Vec<f64> = w.iter().map(|x| x / total).collect();
            if row[i] < 0.05 {
                row.iter_mut().for_each(|p| *p *= 0.95);
                row[i] += 0.05;
            }
            row
        })
        .collect();
    MarkovChain::from_rows(&rows).unwrap()
}

fn markov_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let chain = random_chain(&mut rng);
        let e = canonical_solution(&chain).map_err(|e| e.to_string())?;
        let power = chain.matrix().pow(64);
        let diff = e.max_abs_diff(&power);
        worst = worst.max(diff);
        ensure(diff <= 1e-6, || format!("chain {i}: |E† - E^64| = {diff:e}"))?;
        let report = markov::verify_fixpoint_with(&chain, &e, 1e-8);
        ensure(report.passed, || format!("chain {i}: {:?}", report.failures))?;
    }
    Ok(format!("max |E† - E^64| = {worst:.1e}"))
}

// 8 -----------------------------------------------------------------------

fn markov_worked() -> Outcome {
    let cycle = MarkovChain::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let pi = stationary(&cycle).map_err(|e| e.to_string())?;
    ensure(pi.per_class.len() == 1 && pi.per_class[0].distribution == [0.5, 0.5], || format!("{pi:?}"))?;
    let s = classify(&cycle).map_err(|e| e.to_string())?;
    ensure(s.period == [2], || format!("periods {:?}", s.period))?;

    let absorbing = MarkovChain::from_rows(&[vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
    let e = canonical_solution(&absorbing).map_err(|e| e.to_string())?;
    let want = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let diff = e.max_abs_diff(&want);
    ensure(diff <= 1e-12, || format!("E† = {:?}", e.to_rows()))?;
    Ok(format!("stationary (0.5, 0.5), period 2; absorbing E† within {diff:.1e}"))
}

// 9 -----------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Move(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn moves(&self) -> usize {
        match self {
            Shape::Leaf => 0,
            Shape::Move(l, r) => 1 + l.moves() + r.moves(),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Move(l, r) => l.leaves() + r.leaves(),
        }
    }
}

/// Binary shapes with at most `moves` move nodes and at most `depth`
/// move levels on any path.
fn shapes(moves: usize, depth: usize) -> Vec<Shape> {
    let mut out = vec![Shape::Leaf];
    if moves == 0 || depth == 0 {
        return out;
    }
    let subs = shapes(moves - 1, depth - 1);
    for l in &subs {
        for r in &subs {
            if l.moves() + r.moves() < moves {
                out.push(Shape::Move(Box::new(l.clone()), Box::new(r.clone())));
            }
        }
    }
    out
}

/// A flattened game: node 0 is the root, move nodes list their children.
struct Flat {
    nodes: Vec<Node<usize>>,
    move_ids: Vec<usize>,
    leaf_ids: Vec<usize>,
}

fn flatten(shape: &Shape) -> Flat {
    fn go(s: &Shape, f: &mut Flat) -> usize {
        let id = f.nodes.len();
        match s {
            Shape::Leaf => {
                f.nodes.push(Node::Terminal(vec![0.0, 0.0]));
                f.leaf_ids.push(id);
            }
            Shape::Move(l, r) => {
                f.nodes.push(Node::Move { agent: 0, moves: vec![] });
                f.move_ids.push(id);
                let (a, b) = (go(l, f), go(r, f));
                f.nodes[id] = Node::Move { agent: 0, moves: vec![a, b] };
            }
        }
        id
    }
    let mut f = Flat {
        nodes: Vec::new(),
        move_ids: Vec::new(),
        leaf_ids: Vec::new(),
    };
    go(shape, &mut f);
    f
}

/// Outcome of playing `profile` (a choice per node) from `x`.
fn play<'a>(nodes: &'a [Node<usize>], profile: &[usize], mut x: usize) -> &'a [f64] {
    loop {
        match &nodes[x] {
            Node::Terminal(p) => return p,
            Node::Move { moves, .. } => x = moves[profile[x]],
        }
    }
}

/// Enumerates all pure strategy profiles and returns the root outcomes of
/// the subgame-perfect ones whose every choice is strictly better than
/// each earlier choice and no worse than each later one.
fn spe_oracle(nodes: &[Node<usize>], move_ids: &[usize]) -> Vec<Vec<f64>> {
    let mut profile = vec![0; nodes.len()];
    let mut found = Vec::new();
    for bits in 0..1usize << move_ids.len() {
        for (k, &m) in move_ids.iter().enumerate() {
            profile[m] = (bits >> k) & 1;
        }
        let ok = move_ids.iter().all(|&m| {
            let Node::Move { agent, moves } = &nodes[m] else { unreachable!() };
            let chosen = play(nodes, &profile, moves[profile[m]])[*agent];
            moves.iter().enumerate().all(|(c, &child)| {
                let alt = play(nodes, &profile, child)[*agent];
                match c.cmp(&profile[m]) {
                    std::cmp::Ordering::Less => chosen > alt,
                    std::cmp::Ordering::Equal => true,
                    std::cmp::Ordering::Greater => chosen >= alt,
                }
            })
        });
        if ok {
            found.push(play(nodes, &profile, 0).to_vec());
        }
    }
    found
}

fn check_game(flat: &Flat, nodes: Vec<Node<usize>>, names: &(Vec<String>, Vec<String>)) -> Result<(), String> {
    let oracle = spe_oracle(&nodes, &flat.move_ids);
    ensure(oracle.len() == 1, || format!("{} canonical profiles for {nodes:?}", oracle.len()))?;
    let spec = GameSpec::from_nodes(names.0.clone(), names.1.clone(), nodes, Some(0)).map_err(|e| e.to_string())?;
    let value = backward_induction(&spec, 0).map_err(|e| e.to_string())?;
    ensure(value == oracle[0], || format!("{value:?} vs oracle {:?} on {spec:?}", oracle[0]))
}

fn games_oracle() -> Outcome {
    let names = (vec!["a".to_string(), "b".to_string()], vec!["l".to_string(), "r".to_string()]);
    let mut cases = 0usize;
    for shape in shapes(3, 3) {
        let flat = flatten(&shape);
        let (m, l) = (shape.moves(), shape.leaves());
        for agents in 0..1usize << m {
            for pay in 0..1usize << (4 * l) {
                let mut nodes = flat.nodes.clone();
                for (k, &id) in flat.move_ids.iter().enumerate() {
                    if let Node::Move { agent, .. } = &mut nodes[id] {
                        *agent = (agents >> k) & 1;
                    }
                }
                for (k, &id) in flat.leaf_ids.iter().enumerate() {
                    let bits = pay >> (4 * k);
                    nodes[id] = Node::Terminal(vec![(bits & 3) as f64, ((bits >> 2) & 3) as f64]);
                }
                check_game(&flat, nodes, &names)?;
                cases += 1;
            }
        }
    }

    // Full depth-3 trees: every agent assignment, sampled payoffs.
    let full = Shape::Move(
        Box::new(Shape::Move(
            Box::new(Shape::Move(Box::new(Shape::Leaf), Box::new(Shape::Leaf))),
            Box::new(Shape::Move(Box::new(Shape::Leaf), Box::new(Shape::Leaf))),
        )),
        Box::new(Shape::Move(
            Box::new(Shape::Move(Box::new(Shape::Leaf), Box::new(Shape::Leaf))),
            Box::new(Shape::Move(Box::new(Shape::Leaf), Box::new(Shape::Leaf))),
        )),
    );
    let flat = flatten(&full);
    let mut rng = StdRng::seed_from_u64(9);
    let mut sampled = 0usize;
    for agents in 0..1usize << 7 {
        for _ in 0..500 {
            let mut nodes = flat.nodes.clone();
            for (k, &id) in flat.move_ids.iter().enumerate() {
                if let Node::Move { agent, .. } = &mut nodes[id] {
                    *agent = (agents >> k) & 1;
                }
            }
            for &id in &flat.leaf_ids {
                nodes[id] = Node::Terminal(vec![rng.gen_range(0..4) as f64, rng.gen_range(0..4) as f64]);
            }
            check_game(&flat, nodes, &names)?;
            sampled += 1;
        }
    }
    Ok(format!("{cases} exhaustive games (up to 3 move nodes), {sampled} sampled full depth-3 trees"))
}

// 10 ----------------------------------------------------------------------

fn laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut total = 0;
    for monoid in [MonoidId::Z, MonoidId::N, MonoidId::R, MonoidId::RPlus] {
        let samples = random_timed_samples(monoid, 500, &mut rng);
        let r = check_timed_monad_laws(monoid, &samples).map_err(|e| e.to_string())?;
        ensure(r.passed && r.total_points == 500, || format!("timed laws over {monoid:?}: {:?}", r.failures))?;
        total += r.total_points;
    }
    let r = check_dist_monad_laws(&random_dist_samples(500, &mut rng)).map_err(|e| e.to_string())?;
    ensure(r.passed && r.total_points == 500, || format!("distribution laws: {:?}", r.failures))?;
    let c = comonad_report(500, 5, &mut rng);
    ensure(c.passed && c.total_points == 500, || format!("comonad laws: {:?}", c.failures))?;
    Ok(format!("{total} timed, 500 distribution, 500 comonad samples"))
}

// -------------------------------------------------------------------------

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("Koch endpoints and apex", Duration::from_secs(1), Box::new(koch_points)),
        ("figure reproduction", Duration::MAX, Box::new(figures)),
        ("well-formedness and additivity", Duration::MAX, Box::new(well_formedness)),
        ("timed solver soundness", Duration::MAX, Box::new(timed_soundness)),
        ("oscillator period", Duration::MAX, Box::new(oscillator)),
        ("Zeno partial sums", Duration::MAX, Box::new(zeno)),
        ("Markov oracle equivalence", Duration::from_secs(5), Box::new(markov_oracle)),
        ("Markov worked cases", Duration::MAX, Box::new(markov_worked)),
        ("game oracle equivalence", Duration::from_secs(30), Box::new(games_oracle)),
        ("law suites", Duration::MAX, Box::new(laws)),
    ];
    let mut failed = 0;
    for (number, (name, limit, check)) in (1..).zip(&criteria) {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|msg| {
            if took > *limit {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("PASS  [{number:>2}] {name}: {msg} ({took:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  [{number:>2}] {name}: {msg} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
