//! Discrete state spaces: open grid rooms, wall mazes loaded from text
//! layouts, and a small artificial language whose words transition according
//! to construction rules. Also provides ground-truth transition matrices and
//! seeded training-pair sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Moore neighborhood offsets in row-major scan order.
const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    GridRoom,
    Maze,
    Language,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::GridRoom => "grid-room",
            SpaceKind::Maze => "maze",
            SpaceKind::Language => "language",
        }
    }
}

/// A discrete state graph: grid cells or words, with per-state successor
/// lists. Wall cells are kept in the index space (so a 15x15 maze always has
/// 225 states) but marked invalid and given empty adjacency.
#[derive(Debug, Clone)]
pub struct StateSpace {
    kind: SpaceKind,
    grid_shape: Option<(usize, usize)>,
    valid: Vec<bool>,
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<usize>>,
    reward_states: Vec<usize>,
}

impl StateSpace {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n_states(&self) -> usize {
        self.valid.len()
    }

    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        self.grid_shape
    }

    pub fn is_valid(&self, state: usize) -> bool {
        self.valid[state]
    }

    pub fn valid_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states()).filter(|&s| self.valid[s])
    }

    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn adjacency(&self, state: usize) -> &[usize] {
        &self.adjacency[state]
    }

    /// Valid states with at least one successor. Walls and terminal words
    /// are excluded; these are the states a sampler may emit as inputs.
    pub fn non_terminal_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&s| self.valid[s] && !self.adjacency[s].is_empty())
            .collect()
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.adjacency[state].is_empty()
    }

    /// Word-class id per state; `None` for spatial spaces.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn reward_states(&self) -> &[usize] {
        &self.reward_states
    }

    pub fn is_reward(&self, state: usize) -> bool {
        self.reward_states.binary_search(&state).is_ok()
    }

    pub fn state_index(&self, row: usize, col: usize) -> Option<usize> {
        let (_, cols) = self.grid_shape?;
        Some(row * cols + col)
    }

    pub fn state_coords(&self, state: usize) -> Option<(usize, usize)> {
        let (_, cols) = self.grid_shape?;
        Some((state / cols, state % cols))
    }

    /// Scatter one value per valid state into the grid, walls set to `fill`.
    pub fn scatter(&self, per_state: &[f64], fill: f64) -> Result<Mat> {
        let (rows, cols) = self
            .grid_shape
            .ok_or_else(|| Error::Shape("state space has no grid shape".into()))?;
        if per_state.len() != self.n_states() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                self.n_states(),
                per_state.len()
            )));
        }
        let mut field = Mat::zeros(rows, cols);
        for s in 0..self.n_states() {
            let (r, c) = (s / cols, s % cols);
            field[(r, c)] = if self.valid[s] { per_state[s] } else { fill };
        }
        Ok(field)
    }
}

/// Open rectangular room with Moore (8-neighbor) adjacency and no walls.
pub fn build_grid_room(rows: usize, cols: usize) -> Result<StateSpace> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidDimension(format!(
            "grid room must be at least 2x2, got {rows}x{cols}"
        )));
    }
    let n = rows * cols;
    let valid = vec![true; n];
    let adjacency = build_moore_adjacency(rows, cols, &valid);
    Ok(StateSpace {
        kind: SpaceKind::GridRoom,
        grid_shape: Some((rows, cols)),
        valid,
        adjacency,
        labels: None,
        reward_states: Vec::new(),
    })
}

fn build_moore_adjacency(rows: usize, cols: usize, valid: &[bool]) -> Vec<Vec<usize>> {
    let idx = |r: usize, c: usize| r * cols + c;
    let ok = |r: isize, c: isize| {
        r >= 0
            && c >= 0
            && (r as usize) < rows
            && (c as usize) < cols
            && valid[idx(r as usize, c as usize)]
    };
    let mut adjacency = vec![Vec::new(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            if !valid[idx(r, c)] {
                continue;
            }
            let mut neigh = Vec::new();
            for (dr, dc) in MOORE {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if !ok(nr, nc) {
                    continue;
                }
                // Diagonal steps may not cut a wall corner: both orthogonal
                // intermediate cells must be free.
                if dr != 0 && dc != 0 && !(ok(nr, c as isize) && ok(r as isize, nc)) {
                    continue;
                }
                neigh.push(idx(nr as usize, nc as usize));
            }
            adjacency[idx(r, c)] = neigh;
        }
    }
    adjacency
}

/// Ships with the crate: 15x15, 94 free cells, a central corridor with comb
/// arms above and below, and two food cells on the bottom corridor.
pub const DEFAULT_MAZE: &str = "\
###############
#.............#
#.#.#.#.#.#.#.#
#.#.#.#.#.#.#.#
#.#.#.#.#.#.#.#
#.#.#.#.#.#.#.#
#.#.#.#.#.#.#.#
#.............#
#.###.###.###.#
#.###.###.###.#
#.###.###.###.#
#.###.###.###.#
#.###.###.###.#
#..F.......F..#
###############
";

/// Parse a maze layout: `#` wall, `.` free, `F` free cell holding a reward.
/// Rows must be equal length. A layout without any `F` is accepted (useful
/// for goal-free exploration); callers can check `reward_states()`.
pub fn load_maze(layout_text: &str) -> Result<StateSpace> {
    let lines: Vec<&str> = layout_text.lines().collect();
    if lines.is_empty() {
        return Err(Error::Format("layout is empty".into()));
    }
    let cols = lines[0].chars().count();
    if cols == 0 {
        return Err(Error::Format("layout has empty rows".into()));
    }
    let rows = lines.len();
    let mut valid = Vec::with_capacity(rows * cols);
    let mut reward_states = Vec::new();
    for (r, line) in lines.iter().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != cols {
            return Err(Error::Format(format!(
                "row {} has {} columns, expected {cols}",
                r + 1,
                chars.len()
            )));
        }
        for (c, ch) in chars.iter().enumerate() {
            match ch {
                '#' => valid.push(false),
                '.' => valid.push(true),
                'F' => {
                    valid.push(true);
                    reward_states.push(r * cols + c);
                }
                other => {
                    return Err(Error::Format(format!(
                        "row {} column {}: unexpected character {other:?}",
                        r + 1,
                        c + 1
                    )))
                }
            }
        }
    }
    if !valid.iter().any(|&v| v) {
        return Err(Error::EmptyMaze);
    }
    let adjacency = build_moore_adjacency(rows, cols, &valid);
    Ok(StateSpace {
        kind: SpaceKind::Maze,
        grid_shape: Some((rows, cols)),
        valid,
        adjacency,
        labels: None,
        reward_states,
    })
}

/// The default maze, checked against its advertised cell counts.
pub fn default_maze() -> StateSpace {
    let space = load_maze(DEFAULT_MAZE).expect("built-in layout parses");
    debug_assert_eq!(space.n_states(), 225);
    debug_assert_eq!(space.n_valid(), 94);
    debug_assert_eq!(space.reward_states().len(), 2);
    space
}

/// One word class: a name and how many concrete words it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordClass {
    pub name: String,
    pub size: usize,
}

/// Word classes plus construction rules (chains of class names). States are
/// numbered by declaration order: all words of the first class, then the
/// second, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSpec {
    pub classes: Vec<WordClass>,
    /// Each rule is a chain of class indices into `classes`.
    pub rules: Vec<Vec<usize>>,
    /// Optional declared total; validated against the class sizes when set.
    pub declared_states: Option<usize>,
}

impl LexiconSpec {
    /// 40 words in five classes, with the three construction rules
    /// adjective->noun, pronoun->verb->adjective, question->pronoun->verb.
    pub fn default_spec() -> Self {
        let classes = [
            ("adjective", 10),
            ("verb", 10),
            ("noun", 10),
            ("pronoun", 5),
            ("question", 5),
        ]
        .iter()
        .map(|&(name, size)| WordClass {
            name: name.to_string(),
            size,
        })
        .collect();
        LexiconSpec {
            classes,
            rules: vec![vec![0, 2], vec![3, 1, 0], vec![4, 3, 1]],
            declared_states: Some(40),
        }
    }

    pub fn n_states(&self) -> usize {
        self.classes.iter().map(|c| c.size).sum()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    /// First state id of each class, in declaration order.
    pub fn class_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.classes.len());
        let mut acc = 0;
        for c in &self.classes {
            offsets.push(acc);
            acc += c.size;
        }
        offsets
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::Lexicon("no word classes declared".into()));
        }
        if let Some(c) = self.classes.iter().find(|c| c.size == 0) {
            return Err(Error::Lexicon(format!("class {:?} has size 0", c.name)));
        }
        let mut names: Vec<&str> = self.classes.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.classes.len() {
            return Err(Error::Lexicon("duplicate class name".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Lexicon("no rules declared".into()));
        }
        for rule in &self.rules {
            if rule.len() < 2 {
                return Err(Error::Lexicon(
                    "rule must chain at least two classes".into(),
                ));
            }
            if rule.iter().any(|&c| c >= self.classes.len()) {
                return Err(Error::Lexicon("rule references unknown class".into()));
            }
        }
        if let Some(declared) = self.declared_states {
            let sum = self.n_states();
            if declared != sum {
                return Err(Error::Lexicon(format!(
                    "class sizes sum to {sum} but {declared} states were declared"
                )));
            }
        }
        Ok(())
    }

    /// Parse the key-value lexicon format:
    ///
    /// ```text
    /// states 40
    /// class adjective 10
    /// rule adjective noun
    /// ```
    ///
    /// Blank lines and `#` comments are ignored, `states` is optional.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = LexiconSpec {
            classes: Vec::new(),
            rules: Vec::new(),
            declared_states: None,
        };
        let mut raw_rules: Vec<Vec<String>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap();
            let rest: Vec<&str> = toks.collect();
            let bad = |msg: &str| Error::Lexicon(format!("line {}: {msg}", lineno + 1));
            match key {
                "states" => {
                    let n = rest
                        .first()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| bad("states needs a count"))?;
                    spec.declared_states = Some(n);
                }
                "class" => {
                    if rest.len() != 2 {
                        return Err(bad("class needs a name and a size"));
                    }
                    let size = rest[1]
                        .parse::<usize>()
                        .map_err(|_| bad("class size must be an integer"))?;
                    spec.classes.push(WordClass {
                        name: rest[0].to_string(),
                        size,
                    });
                }
                "rule" => {
                    if rest.len() < 2 {
                        return Err(bad("rule needs at least two class names"));
                    }
                    raw_rules.push(rest.iter().map(|s| s.to_string()).collect());
                }
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }
        for chain in raw_rules {
            let rule: Result<Vec<usize>> = chain
                .iter()
                .map(|name| {
                    spec.class_index(name).ok_or_else(|| {
                        Error::Lexicon(format!("rule references unknown class {name:?}"))
                    })
                })
                .collect();
            spec.rules.push(rule?);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(n) = self.declared_states {
            s.push_str(&format!("states {n}\n"));
        }
        for c in &self.classes {
            s.push_str(&format!("class {} {}\n", c.name, c.size));
        }
        for rule in &self.rules {
            s.push_str("rule");
            for &c in rule {
                s.push(' ');
                s.push_str(&self.classes[c].name);
            }
            s.push('\n');
        }
        s
    }
}

/// Build the language state space: a word's successors are all words of the
/// classes that follow its class in any rule. Classes that never precede
/// another (nouns under the default rules) become terminal states.
pub fn build_language_space(spec: &LexiconSpec) -> Result<StateSpace> {
    spec.validate()?;
    let n = spec.n_states();
    let offsets = spec.class_offsets();
    let n_classes = spec.classes.len();

    // successor classes per class, deduplicated, in declaration order
    let mut succ_classes: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for rule in &spec.rules {
        for w in rule.windows(2) {
            if !succ_classes[w[0]].contains(&w[1]) {
                succ_classes[w[0]].push(w[1]);
            }
        }
    }
    for list in &mut succ_classes {
        list.sort_unstable();
    }

    let mut labels = Vec::with_capacity(n);
    let mut adjacency = Vec::with_capacity(n);
    for (class, wc) in spec.classes.iter().enumerate() {
        for _ in 0..wc.size {
            labels.push(class);
            let mut neigh = Vec::new();
            for &sc in &succ_classes[class] {
                neigh.extend(offsets[sc]..offsets[sc] + spec.classes[sc].size);
            }
            adjacency.push(neigh);
        }
    }

    Ok(StateSpace {
        kind: SpaceKind::Language,
        grid_shape: None,
        valid: vec![true; n],
        adjacency,
        labels: Some(labels),
        reward_states: Vec::new(),
    })
}

/// Row-stochastic one-step transition matrix of the uniform walk on the
/// space: each successor of a state is equally likely. Terminal states and
/// walls get all-zero rows.
pub fn ground_truth_tp(space: &StateSpace) -> TransitionMatrix {
    let n = space.n_states();
    let mut mat = Mat::zeros(n, n);
    for s in 0..n {
        let adj = space.adjacency(s);
        if adj.is_empty() {
            continue;
        }
        let p = 1.0 / adj.len() as f64;
        for &t in adj {
            mat[(s, t)] = p;
        }
    }
    TransitionMatrix::new_unchecked(mat, vec![false; n])
}

/// Row-stochastic (or terminal-zero-row) matrix of one-step successor
/// probabilities. `untrained` flags rows that no training data ever covered
/// (wall/terminal states of a learned matrix); ground-truth matrices have
/// none.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    mat: Mat,
    untrained: Vec<bool>,
}

impl TransitionMatrix {
    /// Validates that every row sums to 1 or to 0 (terminal) within `tol`.
    pub fn new(mat: Mat, untrained: Vec<bool>, tol: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Shape("transition matrix must be square".into()));
        }
        if untrained.len() != mat.rows() {
            return Err(Error::Shape("untrained mask length mismatch".into()));
        }
        for i in 0..mat.rows() {
            let sum: f64 = mat.row(i).iter().sum();
            if (sum - 1.0).abs() > tol && sum.abs() > tol {
                return Err(Error::Config(format!(
                    "row {i} sums to {sum}, expected 0 or 1"
                )));
            }
        }
        Ok(TransitionMatrix { mat, untrained })
    }

    pub(crate) fn new_unchecked(mat: Mat, untrained: Vec<bool>) -> Self {
        TransitionMatrix { mat, untrained }
    }

    pub fn n_states(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.mat.row(s)
    }

    pub fn untrained_rows(&self) -> &[bool] {
        &self.untrained
    }
}

/// A single observed transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionPair {
    pub from: usize,
    pub to: usize,
}

/// Sampled (state, successor) pairs plus the seed and source they came from.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub pairs: Vec<TransitionPair>,
    pub seed: u64,
    pub source_kind: SpaceKind,
    pub n_states: usize,
}

/// Draw `count` pairs: a uniformly random non-terminal state, then a
/// uniformly random successor. Walls and terminal states never appear as
/// inputs. Reproducible for a fixed seed.
pub fn sample_transition_pairs(space: &StateSpace, count: usize, seed: u64) -> Result<TrainingSet> {
    let sources = space.non_terminal_states();
    if sources.is_empty() {
        return Err(Error::Sampling(
            "state space has no non-terminal states to sample from".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let from = sources[rng.gen_range(0..sources.len())];
        let adj = space.adjacency(from);
        let to = adj[rng.gen_range(0..adj.len())];
        pairs.push(TransitionPair { from, to });
    }
    Ok(TrainingSet {
        pairs,
        seed,
        source_kind: space.kind(),
        n_states: space.n_states(),
    })
}

/// Sentence-based sampling for the language space: pick a rule uniformly, a
/// transition position within it uniformly, then a concrete word and its
/// successor uniformly within their classes.
pub fn sample_sentences(
    space: &StateSpace,
    spec: &LexiconSpec,
    count: usize,
    seed: u64,
) -> Result<TrainingSet> {
    if space.kind() != SpaceKind::Language {
        return Err(Error::WrongKind {
            expected: "language",
            got: space.kind().name(),
        });
    }
    spec.validate()?;
    if spec.n_states() != space.n_states() {
        return Err(Error::Lexicon(format!(
            "lexicon describes {} states but space has {}",
            spec.n_states(),
            space.n_states()
        )));
    }
    let offsets = spec.class_offsets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let rule = &spec.rules[rng.gen_range(0..spec.rules.len())];
        let pos = rng.gen_range(0..rule.len() - 1);
        let (fc, tc) = (rule[pos], rule[pos + 1]);
        let from = offsets[fc] + rng.gen_range(0..spec.classes[fc].size);
        let to = offsets[tc] + rng.gen_range(0..spec.classes[tc].size);
        pairs.push(TransitionPair { from, to });
    }
    Ok(TrainingSet {
        pairs,
        seed,
        source_kind: SpaceKind::Language,
        n_states: space.n_states(),
    })
}
