//! Shared helpers for the integration suites: invariant checks and
//! independent reference implementations.
#![allow(dead_code)]

use monolab::agents::Agent;
use monolab::board::{load_board_spec, BoardSpec, DiceSpec, Die};
use monolab::engine::{EventKind, Game, GameEvent, GameResult, GameState, Party};
use monolab::novelty::NoveltySpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Structural invariants that must hold between engine steps.
pub fn check_state(s: &GameState) -> Result<(), String> {
    let n = s.board.len();
    for p in &s.players {
        if p.position >= n {
            return Err(format!("player {} off the board at {}", p.id, p.position));
        }
        if !p.bankrupt && p.cash < 0.0 {
            return Err(format!("solvent player {} has cash {}", p.id, p.cash));
        }
    }
    for (sq, owner) in s.ownership.iter().enumerate() {
        if let Some(o) = owner {
            if s.players[*o].bankrupt {
                return Err(format!("bankrupt player {o} owns {sq}"));
            }
        }
        if owner.is_none() && (s.improvements[sq] > 0 || s.mortgaged[sq]) {
            return Err(format!("bank square {sq} is improved or mortgaged"));
        }
    }
    for (color, squares) in s.board.colors() {
        for &q in squares {
            if s.improvements[q] == 0 {
                continue;
            }
            let o = s.ownership[q].expect("checked above");
            if !s.has_monopoly(o, color) {
                return Err(format!("{color} improved without a monopoly"));
            }
            // A shrunken set can later gain an unimproved or mortgaged square,
            // so there these are properties of each build, checked by
            // [`Checker`].
            if s.board.monopoly_required(color) < squares.len() {
                continue;
            }
            let held: Vec<usize> = s.owned_in_color(o, color).collect();
            if held.iter().any(|&h| s.mortgaged[h]) {
                return Err(format!("{color} improved while mortgaged"));
            }
            let levels: Vec<u32> = held.iter().map(|&h| s.improvements[h]).collect();
            let (lo, hi) = (levels.iter().min().unwrap(), levels.iter().max().unwrap());
            if hi - lo > 1 {
                return Err(format!("{color} violates even build: {levels:?}"));
            }
        }
    }
    Ok(())
}

/// Per-step checker: invariants plus money conservation (each player's
/// cash change equals the transfers logged for them).
pub struct Checker {
    cash: Vec<f64>,
    levels: Vec<u32>,
    pub violations: Vec<String>,
    pub steps: usize,
}

impl Checker {
    pub fn new() -> Self {
        Checker {
            cash: Vec::new(),
            levels: Vec::new(),
            violations: Vec::new(),
            steps: 0,
        }
    }

    pub fn step(&mut self, s: &GameState, events: &[GameEvent]) {
        self.steps += 1;
        if self.cash.is_empty() {
            self.cash = s.players.iter().map(|p| p.cash).collect();
            self.levels = s.improvements.clone();
        }
        self.check_builds(s, events);
        for p in &s.players {
            let logged: f64 = events.iter().map(|e| e.cash_delta(Party::Player(p.id))).sum();
            let actual = p.cash - self.cash[p.id];
            if (logged - actual).abs() > 1e-6 * (1.0 + actual.abs()) {
                self.violations
                    .push(format!("player {} cash moved {actual} but events say {logged}", p.id));
            }
        }
        self.cash = s.players.iter().map(|p| p.cash).collect();
        self.levels.clone_from(&s.improvements);
        if let Err(e) = check_state(s) {
            self.violations.push(e);
        }
    }
}

impl Checker {
    /// A build must go on one of the owner's lowest squares of the colour and
    /// a lone sale must come off one of the highest. Multi-square changes are
    /// liquidations, which clear whole colours.
    fn check_builds(&mut self, s: &GameState, events: &[GameEvent]) {
        let changes: Vec<(usize, u32)> = events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Improvement { square, level } => Some((square, level)),
                _ => None,
            })
            .collect();
        for &(sq, level) in &changes {
            let before = self.levels[sq];
            let Some(owner) = s.ownership[sq] else { continue };
            let peers: Vec<u32> = s
                .board
                .peers(sq)
                .iter()
                .filter(|&&q| s.ownership[q] == Some(owner))
                .map(|&q| self.levels[q])
                .collect();
            let (lo, hi) = (*peers.iter().min().unwrap(), *peers.iter().max().unwrap());
            if level == before + 1 && before != lo {
                self.violations
                    .push(format!("square {sq} built from {before} while a peer is at {lo}"));
            }
            let mortgaged = s
                .board
                .peers(sq)
                .iter()
                .any(|&q| s.ownership[q] == Some(owner) && s.mortgaged[q]);
            if level == before + 1 && mortgaged {
                self.violations
                    .push(format!("square {sq} built while a peer is mortgaged"));
            }
            if changes.len() == 1 && level + 1 == before && before != hi {
                self.violations
                    .push(format!("square {sq} sold from {before} while a peer is at {hi}"));
            }
            self.levels[sq] = level;
        }
    }
}

/// Play a game with the checker attached.
pub fn play_checked(
    agents: &mut [Box<dyn Agent>],
    board: &BoardSpec,
    novelty: Option<&NoveltySpec>,
    seed: u64,
    game_index: usize,
    max_rounds: u32,
) -> (GameResult, Checker) {
    let mut checker = Checker::new();
    let result = Game::new(agents, board, novelty, seed, max_rounds)
        .expect("game setup")
        .game_index(game_index)
        .observe(|s, e| checker.step(s, e))
        .run()
        .expect("game runs");
    (result, checker)
}

/// Twelve squares, one colour of three, two of two, for oracle checks.
pub fn board12() -> BoardSpec {
    let street = |name: &str, color: &str, price: f64| {
        format!(
            r#"{{"name": "{name}", "kind": "property", "color": "{color}", "price": {price}, "mortgage_value": {}, "base_rent": {}, "monopoly_rent": {}, "house_rents": [{}, {}], "house_cost": {}}}"#,
            price / 2.0,
            price / 10.0,
            price / 5.0,
            price / 2.0,
            price,
            price / 2.0
        )
    };
    let squares = [
        r#"{"name": "Go", "kind": "go"}"#.to_string(),
        street("G1", "green", 60.0),
        street("G2", "green", 60.0),
        r#"{"name": "Levy", "kind": "tax", "amount": 40}"#.to_string(),
        street("G3", "green", 80.0),
        r#"{"name": "Chance", "kind": "chance"}"#.to_string(),
        street("P1", "pink", 120.0),
        street("P2", "pink", 140.0),
        r#"{"name": "Rest", "kind": "free-parking"}"#.to_string(),
        street("Y1", "yellow", 200.0),
        r#"{"name": "Chest", "kind": "community"}"#.to_string(),
        street("Y2", "yellow", 220.0),
    ];
    let json = format!(
        r#"{{"squares": [{}], "go_increment": 150, "dice": {{"dice": [{{"faces": [1, 2, 3], "weights": [0.2, 0.3, 0.5]}}]}},
            "chance_deck": [{{"text": "Fine", "effect": {{"type": "pay", "amount": 30}}}}],
            "community_deck": [{{"text": "Gift", "effect": {{"type": "receive", "amount": 20}}}}],
            "mortgage_interest_rate": 0.1, "bank_houses": 32, "bank_hotels": 12}}"#,
        squares.join(",")
    );
    load_board_spec(json.as_bytes()).expect("board12 is valid")
}

pub fn random_die(rng: &mut ChaCha8Rng, max_faces: usize) -> Die {
    let k = rng.gen_range(1..=max_faces);
    let mut faces: Vec<i64> = Vec::new();
    while faces.len() < k {
        let f = rng.gen_range(1..=8);
        if !faces.contains(&f) {
            faces.push(f);
        }
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Die {
        faces,
        weights: raw.iter().map(|w| w / total).collect(),
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Landing distribution by listing every sequence of `k` rolls, face by
/// face, and accumulating its probability.
pub fn enumerate_landing(n: usize, start: usize, k: usize, dice: &DiceSpec) -> Vec<Vec<f64>> {
    // All single-roll outcomes as (total, probability), one entry per face
    // combination.
    let mut outcomes: Vec<(i64, f64)> = vec![(0, 1.0)];
    for die in &dice.dice {
        let mut next = Vec::new();
        for &(t, p) in &outcomes {
            for (f, w) in die.faces.iter().zip(&die.weights) {
                next.push((t + f, p * w));
            }
        }
        outcomes = next;
    }
    let mut rows = vec![vec![0.0; n]; k];
    fn walk(rows: &mut [Vec<f64>], outcomes: &[(i64, f64)], n: usize, pos: usize, prob: f64, depth: usize) {
        if depth == rows.len() {
            return;
        }
        for &(t, p) in outcomes {
            let to = (pos as i64 + t).rem_euclid(n as i64) as usize;
            rows[depth][to] += prob * p;
            walk(rows, outcomes, n, to, prob * p, depth + 1);
        }
    }
    walk(&mut rows, &outcomes, n, start, 1.0, 0);
    rows
}

/// V(s) computed straight from the four formulas, using the board's own
/// rents and an enumerated landing distribution.
pub fn oracle_value(s: &GameState, me: usize, k_short: usize, k_loops: usize) -> [f64; 4] {
    let b = &s.board;
    let n = b.len();
    let rent = |sq: usize| -> f64 {
        match (b.property(sq), s.ownership[sq]) {
            (Some(p), Some(o)) if !s.mortgaged[sq] => {
                let c = &p.color;
                let need = b.monopoly_required(c);
                let have = b
                    .color_squares(c)
                    .iter()
                    .filter(|&&q| s.ownership[q] == Some(o))
                    .count();
                let level = s.improvements[sq] as usize;
                if level == 0 {
                    if have >= need {
                        p.monopoly_rent
                    } else {
                        p.base_rent
                    }
                } else if level <= p.house_rents.len() {
                    p.house_rents[level - 1]
                } else {
                    p.hotel_rent.unwrap()
                }
            }
            _ => 0.0,
        }
    };
    // M_assets
    let mut assets = 0.0;
    for sq in 0..n {
        if s.ownership[sq] == Some(me) {
            let p = b.property(sq).unwrap();
            if !s.mortgaged[sq] {
                assets += p.price;
            }
            assets += s.improvements[sq] as f64 * p.house_cost;
        }
    }
    let opponents: Vec<usize> = (0..s.players.len())
        .filter(|&g| g != me && !s.players[g].bankrupt)
        .collect();
    // R_s
    let mine = enumerate_landing(n, s.players[me].position, k_short, &b.dice);
    let mut r_s = 0.0;
    for &g in &opponents {
        let theirs = enumerate_landing(n, s.players[g].position, k_short, &b.dice);
        for t in 0..k_short {
            for sq in 0..n {
                if s.ownership[sq] == Some(me) {
                    r_s += theirs[t][sq] * rent(sq);
                }
                if s.ownership[sq] == Some(g) {
                    r_s -= mine[t][sq] * rent(sq);
                }
            }
        }
    }
    // R_l
    let mean: f64 = b
        .dice
        .dice
        .iter()
        .map(|d| d.faces.iter().zip(&d.weights).map(|(f, w)| *f as f64 * w).sum::<f64>())
        .sum();
    let q = 1.0 / mean;
    let mut r_l = 0.0;
    for &g in &opponents {
        for sq in 0..n {
            if s.ownership[sq] == Some(me) {
                r_l += q * rent(sq);
            }
            if s.ownership[sq] == Some(g) {
                r_l -= q * rent(sq);
            }
        }
    }
    r_l *= k_loops as f64;
    // M_monopoly
    let f = s.players[me].cash + k_loops as f64 * b.go_increment + r_l;
    let mut best: Option<f64> = None;
    for (color, squares) in b.colors() {
        let owned: Vec<usize> = squares
            .iter()
            .copied()
            .filter(|&q| s.ownership[q] == Some(me))
            .collect();
        if owned.is_empty() {
            continue;
        }
        let mut budget = f;
        for &q in &owned {
            if s.mortgaged[q] {
                budget -= b.property(q).unwrap().mortgage_value * (1.0 + b.mortgage_interest_rate);
            }
        }
        let mut rest: Vec<usize> = squares.iter().copied().filter(|q| !owned.contains(q)).collect();
        rest.sort_by(|&x, &y| {
            b.property(x)
                .unwrap()
                .price
                .partial_cmp(&b.property(y).unwrap().price)
                .unwrap()
                .then(x.cmp(&y))
        });
        let mut held = owned.clone();
        for q in rest {
            let price = b.property(q).unwrap().price;
            if budget >= price - 1e-9 * budget.abs().max(price) {
                budget -= price;
                held.push(q);
            }
        }
        held.sort();
        let need = b.monopoly_required(color);
        let full = held.len() >= need;
        let mut level: Vec<u32> = held.iter().map(|&q| s.improvements[q]).collect();
        let cap = |q: usize| b.property(q).unwrap().max_level();
        let cost = |q: usize| b.property(q).unwrap().house_cost;
        if full {
            loop {
                let open: Vec<usize> = (0..held.len()).filter(|&i| level[i] < cap(held[i])).collect();
                if open.is_empty() {
                    break;
                }
                let low = open.iter().map(|&i| level[i]).min().unwrap();
                let mut pick = None;
                for &i in &open {
                    if level[i] != low {
                        continue;
                    }
                    match pick {
                        None => pick = Some(i),
                        Some(j) if cost(held[i]) < cost(held[j]) => pick = Some(i),
                        _ => {}
                    }
                }
                let i = pick.unwrap();
                let c = cost(held[i]);
                if budget < c - 1e-9 * budget.abs().max(c) {
                    break;
                }
                budget -= c;
                level[i] += 1;
            }
        }
        let mut r_c = 0.0;
        for (i, &q) in held.iter().enumerate() {
            let p = b.property(q).unwrap();
            r_c += match level[i] as usize {
                0 if full => p.monopoly_rent,
                0 => p.base_rent,
                l if l <= p.house_rents.len() => p.house_rents[l - 1],
                _ => p.hotel_rent.unwrap(),
            };
        }
        let missing = need.saturating_sub(owned.len());
        let scaled = r_c / 2f64.powi(missing as i32);
        best = Some(best.map_or(scaled, |x: f64| x.max(scaled)));
    }
    [assets, r_s, r_l, best.unwrap_or(0.0)]
}

/// Posterior mode of a Dirichlet(α) by nested grid search over the
/// simplex: a 1e-2 grid, then repeated tenfold refinement around the best
/// point down to a 1e-9 step (passing through 1e-4).
pub fn dirichlet_mode_grid(alpha: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let log_density = |p: &[f64]| -> f64 {
        p.iter()
            .zip(alpha)
            .map(|(x, a)| {
                if *x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (a - 1.0) * x.ln()
                }
            })
            .sum()
    };
    if k == 1 {
        return vec![1.0];
    }
    let mut centre: Vec<f64> = vec![1.0 / k as f64; k - 1];
    let mut step: f64 = 1e-2;
    let mut radius: f64 = 1.0;
    while step >= 1e-9 {
        let span = (radius / step).ceil() as i64;
        let mut best = (f64::NEG_INFINITY, centre.clone());
        let mut point = vec![0.0; k];
        let mut visit = |free: &[f64]| {
            let last = 1.0 - free.iter().sum::<f64>();
            if last <= 0.0 || free.iter().any(|&x| x <= 0.0) {
                return;
            }
            point[..k - 1].copy_from_slice(free);
            point[k - 1] = last;
            let d = log_density(&point);
            if d > best.0 {
                best = (d, free.to_vec());
            }
        };
        if k == 2 {
            for i in -span..=span {
                visit(&[centre[0] + i as f64 * step]);
            }
        } else {
            for i in -span..=span {
                for j in -span..=span {
                    visit(&[centre[0] + i as f64 * step, centre[1] + j as f64 * step]);
                }
            }
        }
        centre = best.1;
        radius = 3.0 * step;
        step /= 10.0;
    }
    let last = 1.0 - centre.iter().sum::<f64>();
    centre.push(last);
    centre
}

/// A random position that respects the holding rules: improvements only on
/// unmortgaged monopolies, built evenly.
pub fn random_state(rng: &mut ChaCha8Rng, board: &BoardSpec, n_players: usize) -> GameState {
    let mut s = GameState::new(board.clone(), n_players, rng.gen());
    let n = board.len();
    let scale = board.starting_cash;
    for p in &mut s.players {
        p.position = rng.gen_range(0..n);
        p.cash = (rng.gen_range(0.0..2.0) * scale).round();
    }
    if n_players > 2 && rng.gen_bool(0.2) {
        let b = rng.gen_range(1..n_players);
        s.players[b].bankrupt = true;
        s.players[b].cash = 0.0;
    }
    let solvent: Vec<usize> = s.solvent_players().collect();
    for sq in 0..n {
        if board.property(sq).is_some() && rng.gen_bool(0.7) {
            s.ownership[sq] = Some(solvent[rng.gen_range(0..solvent.len())]);
            s.mortgaged[sq] = rng.gen_bool(0.15);
        }
    }
    for squares in board.colors().values() {
        let Some(o) = s.ownership[squares[0]] else { continue };
        let color = board.property(squares[0]).unwrap().color.clone();
        if !s.has_monopoly(o, &color) || squares.iter().any(|&q| s.mortgaged[q]) {
            continue;
        }
        let held: Vec<usize> = s.owned_in_color(o, &color).collect();
        let cap = held
            .iter()
            .map(|&q| board.property(q).unwrap().max_level())
            .min()
            .unwrap();
        if cap == 0 {
            continue;
        }
        let base = rng.gen_range(0..=cap);
        for q in held {
            let bump = base < cap && rng.gen_bool(0.5);
            s.improvements[q] = base + u32::from(bump);
        }
    }
    s.current = solvent[rng.gen_range(0..solvent.len())];
    s
}
