//! Subcommand implementations. Every run writes its artifacts into one
//! output directory together with a manifest pinning configuration, input
//! digests, output digests, and summary metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use srmap_core::analysis::{matrix_error, silhouette, stress_mds, ErrorReport, STRESS_MDS_ITERS};
use srmap_core::env::{
    build_grid_room, build_language_space, default_maze, ground_truth_tp, load_maze,
    sample_sentences, sample_transition_pairs, LexiconSpec, StateSpace, TransitionMatrix,
    DEFAULT_MAZE,
};
use srmap_core::net::{init_network, predict_tp_matrix, train, LayeredNetwork, TrainConfig};
use srmap_core::rl::{greedy_rollout, policy_tp_matrix, train_agent, AgentConfig, TerminalCause};
use srmap_core::spectral::{eigenmaps_from, sr_spectrum};
use srmap_core::sr::{successor_matrix, value_function, RewardVector, SrConfig, SuccessorMatrix};
use srmap_core::Mat;

use crate::error::{CliError, Result};
use crate::manifest::{digest_string, ExperimentManifest, RunDir};
use crate::render::{render_heatmap, Palette};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvChoice {
    /// 10x10 open room
    Room10,
    /// 15x15 maze (built-in layout unless --maze-file is given)
    Maze,
    /// 40-word lexicon with construction rules
    Language,
}

impl EnvChoice {
    fn name(self) -> &'static str {
        match self {
            EnvChoice::Room10 => "room10",
            EnvChoice::Maze => "maze",
            EnvChoice::Language => "language",
        }
    }
}

/// Resolve a spatial environment plus the digest of the layout it came from.
fn spatial_space(
    choice: EnvChoice,
    maze_file: &Option<PathBuf>,
) -> Result<(StateSpace, BTreeMap<String, String>)> {
    let mut digests = BTreeMap::new();
    let space = match choice {
        EnvChoice::Room10 => build_grid_room(10, 10)?,
        EnvChoice::Maze => match maze_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
                digests.insert("maze_file".to_string(), digest_string(text.as_bytes()));
                load_maze(&text)?
            }
            None => {
                digests.insert(
                    "maze_builtin".to_string(),
                    digest_string(DEFAULT_MAZE.as_bytes()),
                );
                default_maze()
            }
        },
        EnvChoice::Language => {
            return Err(CliError::Usage(
                "this command needs a spatial environment (room10 or maze)".into(),
            ))
        }
    };
    Ok((space, digests))
}

/// Scatter one SR row over the grid, walls as NaN so they render reserved.
fn row_field(space: &StateSpace, row: &[f64]) -> Result<Mat> {
    Ok(space.scatter(row, f64::NAN)?)
}

/// Representative states for per-state heatmaps: two fixed interior states
/// for the 10x10 room, otherwise three spread over the valid cells.
fn heatmap_states(space: &StateSpace) -> Vec<usize> {
    if space.grid_shape() == Some((10, 10)) && space.n_valid() == 100 {
        return vec![33, 66];
    }
    let pool: Vec<usize> = space
        .non_terminal_states()
        .into_iter()
        .filter(|&s| !space.is_reward(s))
        .collect();
    let mut picks = vec![
        pool[pool.len() / 4],
        pool[pool.len() / 2],
        pool[3 * pool.len() / 4],
    ];
    picks.dedup();
    picks
}

/// Fraction of non-terminal states whose top-k predicted successors (k =
/// true neighbor count) coincide with the true neighbor set.
fn support_fraction(tp: &TransitionMatrix, space: &StateSpace) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for s in space.non_terminal_states() {
        total += 1;
        let neighbors = space.adjacency(s);
        let mut order: Vec<usize> = (0..space.n_states()).collect();
        let row = tp.row(s);
        order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap());
        let mut top: Vec<usize> = order[..neighbors.len()].to_vec();
        top.sort_unstable();
        if top == neighbors {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn excluded_rows(space: &StateSpace) -> Vec<bool> {
    (0..space.n_states())
        .map(|s| space.is_terminal(s))
        .collect()
}

#[derive(serde::Serialize)]
struct ComparisonReport {
    tp: ErrorReport,
    sr: ErrorReport,
}

/// Three-phase schedule over a total epoch budget: half the epochs at the
/// base rate, a quarter at 0.4x, the rest at 0.1x. Returns the final report
/// of each phase chained into one loss curve.
fn train_phased(
    net: &mut LayeredNetwork,
    data: &srmap_core::env::TrainingSet,
    epochs: usize,
    batch: usize,
    lr: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let phases = [
        (epochs / 2, lr),
        (epochs / 4, lr * 0.4),
        (epochs - epochs / 2 - epochs / 4, lr * 0.1),
    ];
    let mut losses = Vec::new();
    let mut done = 0usize;
    for (phase_epochs, phase_lr) in phases {
        if phase_epochs == 0 {
            continue;
        }
        let cfg = TrainConfig {
            epochs: phase_epochs,
            batch_size: batch,
            learning_rate: phase_lr,
            seed: seed + done as u64,
        };
        let report = train(net, data, &cfg)?;
        losses.extend(report.epoch_loss);
        done += phase_epochs;
    }
    Ok(losses)
}

// ---------------------------------------------------------------------------
// explore

#[derive(Debug, Clone, Args)]
pub struct ExploreArgs {
    /// Environment to explore
    #[arg(long, value_enum, default_value_t = EnvChoice::Room10)]
    pub env: EnvChoice,
    /// Maze layout file (with --env maze)
    #[arg(long)]
    pub maze_file: Option<PathBuf>,
    /// Number of sampled (state, successor) training pairs
    #[arg(long, default_value_t = 50_000)]
    pub samples: usize,
    /// Total training epochs (annealed in three phases)
    #[arg(long, default_value_t = 400)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// SR discount factor
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// SR horizon (number of time steps)
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "runs/explore")]
    pub out: PathBuf,
    /// Use the full published training budget (50,000 samples, 10,000 epochs)
    #[arg(long, default_value_t = false)]
    pub paper_budget: bool,
}

pub fn run_explore(args: &ExploreArgs) -> Result<ExperimentManifest> {
    let (samples, epochs) = if args.paper_budget {
        (50_000, 10_000)
    } else {
        (args.samples, args.epochs)
    };
    let (space, input_digests) = spatial_space(args.env, &args.maze_file)?;
    let truth = ground_truth_tp(&space);
    let data = sample_transition_pairs(&space, samples, args.seed + 1)?;

    let n = space.n_states();
    let mut net = init_network(n, n, args.seed)?;
    let losses = train_phased(&mut net, &data, epochs, args.batch, args.lr, args.seed + 2)?;

    let learned = predict_tp_matrix(&net, &space)?;
    let cfg = SrConfig::new(args.gamma, args.t);
    let sr_learned = successor_matrix(&learned, &cfg)?;
    let sr_truth = successor_matrix(&truth, &cfg)?;

    let excluded = excluded_rows(&space);
    let tp_report = matrix_error(learned.mat(), truth.mat(), &excluded)?;
    let sr_report = matrix_error(sr_learned.mat(), sr_truth.mat(), &excluded)?;
    let support = support_fraction(&learned, &space);

    let mut run = RunDir::create(&args.out)?;
    run.write("tp.csv", learned.mat().to_csv().as_bytes())?;
    run.write("sr.csv", sr_learned.mat().to_csv().as_bytes())?;
    run.write(
        "error_report.json",
        serde_json::to_string_pretty(&ComparisonReport {
            tp: tp_report.clone(),
            sr: sr_report.clone(),
        })?
        .as_bytes(),
    )?;
    run.write("checkpoint.net", net.to_checkpoint().as_bytes())?;
    for s in heatmap_states(&space) {
        let learned_field = row_field(&space, sr_learned.row(s))?;
        let truth_field = row_field(&space, sr_truth.row(s))?;
        run.write(
            &format!("maps/sr_learned_{s:03}.pgm"),
            &render_heatmap(&learned_field, Palette::Gray)?,
        )?;
        run.write(
            &format!("maps/sr_truth_{s:03}.pgm"),
            &render_heatmap(&truth_field, Palette::Gray)?,
        )?;
    }

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!(args.env.name()));
    config.insert("samples".into(), json!(samples));
    config.insert("epochs".into(), json!(epochs));
    config.insert("batch".into(), json!(args.batch));
    config.insert("lr".into(), json!(args.lr));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));
    config.insert("seed".into(), json!(args.seed));
    config.insert("paper_budget".into(), json!(args.paper_budget));

    let mut metrics = BTreeMap::new();
    metrics.insert("tp_mean_tv".into(), tp_report.mean_tv);
    metrics.insert("sr_frobenius_rel".into(), sr_report.frobenius_relative);
    metrics.insert("support_fraction".into(), support);
    if let Some(&loss) = losses.last() {
        metrics.insert("final_loss".into(), loss);
    }

    run.finish("explore", config, input_digests, metrics)
}

// ---------------------------------------------------------------------------
// navigate

#[derive(Debug, Clone, Args)]
pub struct NavigateArgs {
    /// Maze layout file (defaults to the built-in layout)
    #[arg(long)]
    pub maze_file: Option<PathBuf>,
    /// Number of training episodes
    #[arg(long, default_value_t = 10_000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// SR discount factor
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// SR horizon; should exceed the longest goal distance
    #[arg(long, default_value_t = 30)]
    pub t: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "runs/navigate")]
    pub out: PathBuf,
    /// Use the full published training budget (10,000 episodes)
    #[arg(long, default_value_t = false)]
    pub paper_budget: bool,
}

pub fn run_navigate(args: &NavigateArgs) -> Result<ExperimentManifest> {
    let episodes = if args.paper_budget {
        10_000
    } else {
        args.epochs
    };
    let (space, input_digests) = spatial_space(EnvChoice::Maze, &args.maze_file)?;

    let agent_cfg = AgentConfig {
        episodes,
        learning_rate: args.lr,
        seed: args.seed,
        ..AgentConfig::default()
    };
    let agent = train_agent(&space, &agent_cfg)?;

    let policy_tp = policy_tp_matrix(&agent, &space)?;
    let sr = successor_matrix(&policy_tp, &SrConfig::new(args.gamma, args.t))?;

    let mut reward_mass = vec![0.0; space.n_states()];
    for &g in space.reward_states() {
        reward_mass[g] = 1.0;
    }
    let values = value_function(&sr, &RewardVector::new(reward_mass)?)?;

    // greedy rollouts from every valid non-goal start
    let starts: Vec<usize> = space
        .non_terminal_states()
        .into_iter()
        .filter(|&s| !space.is_reward(s))
        .collect();
    let mut rollouts = Vec::with_capacity(starts.len());
    let mut reached = 0usize;
    let mut steps_sum = 0usize;
    for &s in &starts {
        let ep = greedy_rollout(&agent, &space, s, agent_cfg.max_steps)?;
        if ep.cause == TerminalCause::Goal {
            reached += 1;
            steps_sum += ep.steps();
        }
        rollouts.push((s, ep));
    }

    // baseline: SR of the uniform walk on the same maze
    let uniform_tp = ground_truth_tp(&space);
    let uniform_sr = successor_matrix(&uniform_tp, &SrConfig::new(args.gamma, args.t))?;
    let excluded: Vec<bool> = (0..space.n_states())
        .map(|s| space.is_terminal(s) || space.is_reward(s))
        .collect();
    let tp_report = matrix_error(policy_tp.mat(), uniform_tp.mat(), &excluded)?;
    let sr_report = matrix_error(sr.mat(), uniform_sr.mat(), &excluded)?;

    let mut run = RunDir::create(&args.out)?;
    run.write("tp.csv", policy_tp.mat().to_csv().as_bytes())?;
    run.write("sr.csv", sr.mat().to_csv().as_bytes())?;
    run.write(
        "value.csv",
        space.scatter(&values, 0.0)?.to_csv().as_bytes(),
    )?;
    run.write("agent.ckpt", agent.to_checkpoint().as_bytes())?;
    run.write(
        "episodes.csv",
        episodes_csv(&agent_cfg, &rollouts).as_bytes(),
    )?;
    run.write(
        "error_report.json",
        serde_json::to_string_pretty(&ComparisonReport {
            tp: tp_report.clone(),
            sr: sr_report.clone(),
        })?
        .as_bytes(),
    )?;
    let value_field = row_field(&space, &values)?;
    run.write(
        "maps/value.pgm",
        &render_heatmap(&value_field, Palette::Gray)?,
    )?;
    for s in heatmap_states(&space) {
        let field = row_field(&space, sr.row(s))?;
        run.write(
            &format!("maps/sr_state_{s:03}.pgm"),
            &render_heatmap(&field, Palette::Gray)?,
        )?;
    }

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!("maze"));
    config.insert("epochs".into(), json!(episodes));
    config.insert("lr".into(), json!(args.lr));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));
    config.insert("seed".into(), json!(args.seed));
    config.insert("paper_budget".into(), json!(args.paper_budget));
    if let Some(path) = &args.maze_file {
        config.insert("maze_file".into(), json!(path.display().to_string()));
    }

    let goal_episodes = agent
        .train_log()
        .iter()
        .filter(|e| e.cause == TerminalCause::Goal)
        .count();
    let mut metrics = BTreeMap::new();
    metrics.insert("goal_fraction".into(), reached as f64 / starts.len() as f64);
    metrics.insert(
        "mean_goal_steps".into(),
        if reached > 0 {
            steps_sum as f64 / reached as f64
        } else {
            f64::NAN
        },
    );
    metrics.insert(
        "train_goal_fraction".into(),
        goal_episodes as f64 / agent.train_log().len().max(1) as f64,
    );
    metrics.insert("tp_mean_tv_vs_uniform".into(), tp_report.mean_tv);

    run.finish("navigate", config, input_digests, metrics)
}

fn episodes_csv(cfg: &AgentConfig, rollouts: &[(usize, srmap_core::rl::Episode)]) -> String {
    let mut csv = String::from("episode,step,state,action,reward,cause\n");
    for (id, ep) in rollouts {
        if ep.actions.is_empty() {
            let _ = writeln!(csv, "{id},0,{},,0,{}", ep.visited[0], ep.cause.name());
            continue;
        }
        let last = ep.actions.len() - 1;
        for (t, action) in ep.actions.iter().enumerate() {
            let reward = if t < last {
                cfg.reward_step
            } else {
                match ep.cause {
                    TerminalCause::Goal => cfg.reward_goal,
                    TerminalCause::WallChoice => cfg.reward_wall,
                    TerminalCause::StepLimit => cfg.reward_step,
                }
            };
            let cause = if t == last { ep.cause.name() } else { "" };
            let _ = writeln!(
                csv,
                "{id},{t},{},{},{},{}",
                ep.visited[t], action, reward, cause
            );
        }
    }
    csv
}

// ---------------------------------------------------------------------------
// language

#[derive(Debug, Clone, Args)]
pub struct LanguageArgs {
    /// Number of generated training samples
    #[arg(long, default_value_t = 5_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// SR discount factor
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// SR horizon (number of time steps)
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "runs/language")]
    pub out: PathBuf,
    /// Use the full published training budget (5,000 samples, 50 epochs)
    #[arg(long, default_value_t = false)]
    pub paper_budget: bool,
}

/// Hidden width for the language network. A bottleneck narrower than the
/// lexicon pools statistics across words of one class, which matters at the
/// small published sample budget.
const LANGUAGE_HIDDEN: usize = 20;

/// Transition-graph edges below this probability are omitted from exports.
pub const EDGE_EPSILON: f64 = 1e-4;

struct LanguageRun {
    space: StateSpace,
    spec: LexiconSpec,
    truth: TransitionMatrix,
    learned: TransitionMatrix,
    sr_truth: SuccessorMatrix,
    sr_learned: SuccessorMatrix,
    final_loss: Option<f64>,
}

fn train_language(args: &LanguageArgs) -> Result<LanguageRun> {
    let (samples, epochs) = if args.paper_budget {
        (5_000, 50)
    } else {
        (args.samples, args.epochs)
    };
    let spec = LexiconSpec::default_spec();
    let space = build_language_space(&spec)?;
    let truth = ground_truth_tp(&space);
    let data = sample_sentences(&space, &spec, samples, args.seed + 1)?;

    let mut net = init_network(space.n_states(), LANGUAGE_HIDDEN, args.seed)?;
    let report = train(
        &mut net,
        &data,
        &TrainConfig {
            epochs,
            batch_size: args.batch,
            learning_rate: args.lr,
            seed: args.seed + 2,
        },
    )?;

    let learned = predict_tp_matrix(&net, &space)?;
    let cfg = SrConfig::new(args.gamma, args.t);
    let sr_truth = successor_matrix(&truth, &cfg)?;
    let sr_learned = successor_matrix(&learned, &cfg)?;
    Ok(LanguageRun {
        space,
        spec,
        truth,
        learned,
        sr_truth,
        sr_learned,
        final_loss: report.final_loss(),
    })
}

/// Smallest fraction of predicted successor mass landing on the correct
/// successor class, over all non-terminal words.
fn min_class_mass(run: &LanguageRun) -> f64 {
    let labels = run.space.labels().expect("language space has labels");
    let mut worst = 1.0f64;
    for s in run.space.non_terminal_states() {
        let succ_class = labels[run.space.adjacency(s)[0]];
        let mass: f64 = run
            .learned
            .row(s)
            .iter()
            .enumerate()
            .filter(|(t, _)| labels[*t] == succ_class)
            .map(|(_, p)| p)
            .sum();
        worst = worst.min(mass);
    }
    worst
}

fn edge_list(tp: &TransitionMatrix) -> String {
    let mut text = String::new();
    let n = tp.n_states();
    for s in 0..n {
        for t in 0..n {
            let p = tp.row(s)[t];
            if p >= EDGE_EPSILON {
                let _ = writeln!(text, "{s} {t} {p}");
            }
        }
    }
    text
}

pub fn run_language(args: &LanguageArgs) -> Result<ExperimentManifest> {
    let run_data = train_language(args)?;
    let excluded = excluded_rows(&run_data.space);
    let tp_report = matrix_error(run_data.learned.mat(), run_data.truth.mat(), &excluded)?;
    let sr_report = matrix_error(
        run_data.sr_learned.mat(),
        run_data.sr_truth.mat(),
        &excluded,
    )?;
    let class_mass = min_class_mass(&run_data);
    let edges = edge_list(&run_data.learned);
    let edge_count = edges.lines().count();

    let mut input_digests = BTreeMap::new();
    input_digests.insert(
        "lexicon".to_string(),
        digest_string(run_data.spec.to_text().as_bytes()),
    );

    let mut run = RunDir::create(&args.out)?;
    run.write("lexicon.txt", run_data.spec.to_text().as_bytes())?;
    run.write("tp.csv", run_data.learned.mat().to_csv().as_bytes())?;
    run.write("sr.csv", run_data.sr_learned.mat().to_csv().as_bytes())?;
    run.write("edges.txt", edges.as_bytes())?;
    run.write(
        "error_report.json",
        serde_json::to_string_pretty(&ComparisonReport {
            tp: tp_report.clone(),
            sr: sr_report.clone(),
        })?
        .as_bytes(),
    )?;

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!("language"));
    config.insert("samples".into(), json!(args.samples));
    config.insert("epochs".into(), json!(args.epochs));
    config.insert("batch".into(), json!(args.batch));
    config.insert("lr".into(), json!(args.lr));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));
    config.insert("seed".into(), json!(args.seed));
    config.insert("hidden".into(), json!(LANGUAGE_HIDDEN));
    config.insert("paper_budget".into(), json!(args.paper_budget));

    let mut metrics = BTreeMap::new();
    metrics.insert("tp_mean_tv".into(), tp_report.mean_tv);
    metrics.insert("sr_frobenius_rel".into(), sr_report.frobenius_relative);
    metrics.insert("min_class_mass".into(), class_mass);
    metrics.insert("edge_count".into(), edge_count as f64);
    if let Some(loss) = run_data.final_loss {
        metrics.insert("final_loss".into(), loss);
    }

    run.finish("language", config, input_digests, metrics)
}

// ---------------------------------------------------------------------------
// eigen

#[derive(Debug, Clone, Args)]
pub struct EigenArgs {
    /// Environment whose ground-truth SR is decomposed
    #[arg(long, value_enum, default_value_t = EnvChoice::Room10)]
    pub env: EnvChoice,
    /// Maze layout file (with --env maze)
    #[arg(long)]
    pub maze_file: Option<PathBuf>,
    /// Number of eigenmaps to emit
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    /// SR discount factor
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// SR horizon (number of time steps)
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    #[arg(long, default_value = "runs/eigen")]
    pub out: PathBuf,
}

pub fn run_eigen(args: &EigenArgs) -> Result<ExperimentManifest> {
    // a language environment has no grid to reshape into; let the spectral
    // layer report that as a diagnostic error rather than a usage error
    let (space, input_digests) = match args.env {
        EnvChoice::Language => {
            let space = build_language_space(&LexiconSpec::default_spec())?;
            (space, BTreeMap::new())
        }
        other => spatial_space(other, &args.maze_file)?,
    };
    let truth = ground_truth_tp(&space);
    let sr = successor_matrix(&truth, &SrConfig::new(args.gamma, args.t))?;
    let dec = sr_spectrum(&sr, &space)?;
    let maps = eigenmaps_from(&dec, &space, args.k)?;

    let mut run = RunDir::create(&args.out)?;
    let mut eig_csv = String::from("rank,eigenvalue\n");
    for (rank, value) in dec.eigenvalues().iter().enumerate() {
        let _ = writeln!(eig_csv, "{rank},{value}");
    }
    run.write("eigenvalues.csv", eig_csv.as_bytes())?;
    for map in &maps {
        // signed fields take the diverging palette; walls as NaN
        let mut field = map.field().clone();
        if let Some((rows, cols)) = space.grid_shape() {
            for r in 0..rows {
                for c in 0..cols {
                    let s = r * cols + c;
                    if !space.is_valid(s) {
                        field[(r, c)] = f64::NAN;
                    }
                }
            }
        }
        run.write(
            &format!("maps/eigen_{:03}.svg", map.rank()),
            &render_heatmap(&field, Palette::Diverging)?,
        )?;
    }

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!(args.env.name()));
    config.insert("k".into(), json!(args.k));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));

    let mut metrics = BTreeMap::new();
    metrics.insert(
        "symmetrization_residual".into(),
        dec.symmetrization_residual(),
    );
    metrics.insert("k".into(), args.k as f64);
    metrics.insert("top_eigenvalue".into(), dec.eigenvalues()[0]);

    run.finish("eigen", config, input_digests, metrics)
}

// ---------------------------------------------------------------------------
// mds

#[derive(Debug, Clone, Args)]
pub struct MdsArgs {
    /// Number of generated training samples for the learned matrices
    #[arg(long, default_value_t = 5_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// SR discount factor
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// SR horizon (number of time steps)
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "runs/mds")]
    pub out: PathBuf,
    /// Use the full published training budget (5,000 samples, 50 epochs)
    #[arg(long, default_value_t = false)]
    pub paper_budget: bool,
}

fn embedding_csv(
    emb: &srmap_core::analysis::Embedding2D,
    spec: &LexiconSpec,
    labels: &[usize],
) -> String {
    let mut csv = String::from("item,label,x,y\n");
    for (i, &(x, y)) in emb.coords.iter().enumerate() {
        let name = &spec.classes[labels[i]].name;
        let _ = writeln!(csv, "{i},{name},{x},{y}");
    }
    csv
}

pub fn run_mds(args: &MdsArgs) -> Result<ExperimentManifest> {
    let lang_args = LanguageArgs {
        samples: args.samples,
        epochs: args.epochs,
        batch: args.batch,
        lr: args.lr,
        gamma: args.gamma,
        t: args.t,
        seed: args.seed,
        out: args.out.clone(),
        paper_budget: args.paper_budget,
    };
    let run_data = train_language(&lang_args)?;
    let labels = run_data
        .space
        .labels()
        .expect("language space has labels")
        .to_vec();

    let embed = |mat: &Mat| -> Result<srmap_core::analysis::Embedding2D> {
        let rows: Vec<Vec<f64>> = (0..mat.rows()).map(|s| mat.row(s).to_vec()).collect();
        Ok(stress_mds(&rows, STRESS_MDS_ITERS)?.with_labels(labels.clone())?)
    };

    let sets = [
        ("tp_truth", run_data.truth.mat()),
        ("sr_truth", run_data.sr_truth.mat()),
        ("tp_learned", run_data.learned.mat()),
        ("sr_learned", run_data.sr_learned.mat()),
    ];

    let mut run = RunDir::create(&args.out)?;
    let mut metrics = BTreeMap::new();
    let mut silhouettes = BTreeMap::new();
    for (name, mat) in sets {
        let emb = embed(mat)?;
        let score = silhouette(&emb)?;
        run.write(
            &format!("embedding_{name}.csv"),
            embedding_csv(&emb, &run_data.spec, &labels).as_bytes(),
        )?;
        metrics.insert(format!("silhouette_{name}"), score);
        silhouettes.insert(name.to_string(), score);
    }
    run.write(
        "mds_report.json",
        serde_json::to_string_pretty(&json!({ "silhouettes": silhouettes }))?.as_bytes(),
    )?;

    let mut input_digests = BTreeMap::new();
    input_digests.insert(
        "lexicon".to_string(),
        digest_string(run_data.spec.to_text().as_bytes()),
    );

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!("language"));
    config.insert("samples".into(), json!(args.samples));
    config.insert("epochs".into(), json!(args.epochs));
    config.insert("batch".into(), json!(args.batch));
    config.insert("lr".into(), json!(args.lr));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));
    config.insert("seed".into(), json!(args.seed));
    config.insert("paper_budget".into(), json!(args.paper_budget));

    run.finish("mds", config, input_digests, metrics)
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Environment whose ground-truth matrices are emitted
    #[arg(long, value_enum, default_value_t = EnvChoice::Room10)]
    pub env: EnvChoice,
    /// Maze layout file (with --env maze)
    #[arg(long)]
    pub maze_file: Option<PathBuf>,
    /// SR discount factor
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// SR horizon (number of time steps)
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    #[arg(long, default_value = "runs/oracle")]
    pub out: PathBuf,
}

pub fn run_oracle(args: &OracleArgs) -> Result<ExperimentManifest> {
    let (space, input_digests) = match args.env {
        EnvChoice::Language => {
            let spec = LexiconSpec::default_spec();
            let mut digests = BTreeMap::new();
            digests.insert(
                "lexicon".to_string(),
                digest_string(spec.to_text().as_bytes()),
            );
            (build_language_space(&spec)?, digests)
        }
        other => spatial_space(other, &args.maze_file)?,
    };
    let tp = ground_truth_tp(&space);
    let sr = successor_matrix(&tp, &SrConfig::new(args.gamma, args.t))?;

    let mut run = RunDir::create(&args.out)?;
    run.write("tp.csv", tp.mat().to_csv().as_bytes())?;
    run.write("sr.csv", sr.mat().to_csv().as_bytes())?;

    let mut config = BTreeMap::new();
    config.insert("env".into(), json!(args.env.name()));
    config.insert("gamma".into(), json!(args.gamma));
    config.insert("t".into(), json!(args.t));

    let mut metrics = BTreeMap::new();
    metrics.insert("n_states".into(), space.n_states() as f64);
    metrics.insert("n_valid".into(), space.n_valid() as f64);
    metrics.insert("n_rewards".into(), space.reward_states().len() as f64);

    run.finish("oracle", config, input_digests, metrics)
}
