use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use monodromy_core::braid::{self, Arc, BraidWord, FreeWord};
use monodromy_core::flux::{self, Fibration, MatchingPath};
use monodromy_core::groupoid::{self, GroupoidMorphism};
use monodromy_core::polygon;
use monodromy_core::quiver::{self, ExchangeMatrix, QuiverWithPotential};
use monodromy_core::surface::{self, IdealTriangulation};
use monodromy_core::verify::{self, CRITERIA, DEFAULT_SEED};

/// Cluster exchange graphs, surface flips, braid arcs, wall crossings and
/// flux fibrations from the command line. Results are JSON on stdout.
#[derive(Parser)]
#[command(name = "monodromy", version)]
struct Cli {
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for parallel enumeration.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// n-angulations of polygons and their exchange graphs.
    #[command(subcommand)]
    Polygon(PolygonCmd),
    /// Ideal triangulations of marked surfaces.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Quivers with potential and mutation.
    #[command(subcommand)]
    Quiver(QuiverCmd),
    /// Braid words, the Artin action and arcs.
    #[command(subcommand)]
    Braid(BraidCmd),
    /// The six-chamber wall-crossing groupoid.
    #[command(subcommand)]
    Groupoid(GroupoidCmd),
    /// Torus fibrations with twist and flux markers.
    #[command(subcommand)]
    Flux(FluxCmd),
    /// Runs the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Args)]
struct PolygonSize {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
}

#[derive(Subcommand)]
enum PolygonCmd {
    /// d_{k,n} = (k+1)(n-2) + 2.
    DParam {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        n: i64,
    },
    Diagonals(PolygonSize),
    Angulations(PolygonSize),
    ExchangeGraph {
        #[command(flatten)]
        size: PolygonSize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    Automorphisms(PolygonSize),
}

#[derive(Args)]
struct SurfaceSpec {
    /// Genus.
    #[arg(long)]
    g: usize,
    /// Boundary parameters, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Arc and triangle counts from the formula.
    Counts(SurfaceSpec),
    /// A fan triangulation of the surface.
    Seed(SurfaceSpec),
    Validate {
        #[arg(long)]
        input: String,
    },
    Flip {
        #[arg(long)]
        input: String,
        #[arg(long)]
        arc: usize,
    },
    /// Dual quiver with potential of a triangulation.
    Quiver {
        #[arg(long)]
        input: String,
    },
    /// Checks that flipping every arc matches mutation.
    Compatible {
        #[arg(long)]
        input: String,
    },
    /// Flip graph, exhaustive or up to a depth from the seed.
    Graph {
        #[command(flatten)]
        spec: SurfaceSpec,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NamedQuiver {
    DoubleBubble,
    Conifold,
    A,
}

#[derive(Subcommand)]
enum QuiverCmd {
    Named {
        #[arg(value_enum)]
        name: NamedQuiver,
        /// Rank for the `a` family.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Mutates a quiver or a bare exchange matrix.
    Mutate {
        #[arg(long)]
        input: String,
        #[arg(long)]
        vertex: usize,
    },
    /// Skew-symmetrized arrow counts.
    Euler {
        #[arg(long)]
        input: String,
    },
}

#[derive(Args)]
struct ArcSpec {
    /// Braid word such as "s1 S2" (capital letters are inverses).
    #[arg(long, default_value = "")]
    word: String,
    /// Index i of the base arc from puncture i to i + 1.
    #[arg(long)]
    base: usize,
}

#[derive(Subcommand)]
enum BraidCmd {
    /// Artin images of the free generators.
    Images {
        #[arg(long)]
        strands: usize,
        #[arg(long)]
        word: String,
    },
    Eq {
        #[arg(long)]
        strands: usize,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    Permutation {
        #[arg(long)]
        strands: usize,
        #[arg(long)]
        word: String,
    },
    Endpoints {
        #[arg(long)]
        strands: usize,
        #[command(flatten)]
        arc: ArcSpec,
    },
    /// Interior intersection and rank class of two arcs.
    Compare {
        #[arg(long)]
        strands: usize,
        #[arg(long, default_value = "")]
        word1: String,
        #[arg(long)]
        base1: usize,
        #[arg(long, default_value = "")]
        word2: String,
        #[arg(long)]
        base2: usize,
    },
}

#[derive(Subcommand)]
enum GroupoidCmd {
    /// The six reflection composites and the permutation-matrix check.
    Rigidity,
    /// Compares two galleries such as "L: F1 F2 F1".
    Eq {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    Describe {
        #[arg(long)]
        morphism: String,
    },
    /// Counts distinct morphisms into the base chamber.
    Enumerate {
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Conifold,
    W0,
}

#[derive(Args)]
struct FibrationSpec {
    /// Fibration JSON file (or - for stdin).
    #[arg(long, conflicts_with = "preset")]
    fibration: Option<String>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Flux `s,t` added to the preset; entries may be fractions like 1/2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    flux: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum FluxCmd {
    /// Homology action of the Dehn twist in a class.
    Twist {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Vec<i64>,
    },
    Monodromy {
        #[command(flatten)]
        fib: FibrationSpec,
        /// Vertex list as JSON.
        #[arg(long)]
        path: String,
    },
    Matching {
        #[command(flatten)]
        fib: FibrationSpec,
        /// Vertex list, or {"vertices": [...], "mid": k}, as JSON.
        #[arg(long)]
        path: String,
    },
    Disjoint {
        #[command(flatten)]
        fib: FibrationSpec,
        #[arg(long)]
        path1: String,
        #[arg(long)]
        path2: String,
    },
    /// The wrapped family and all pairwise verdicts.
    Family {
        #[command(flatten)]
        fib: FibrationSpec,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    Surgery {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v1: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v2: Vec<i64>,
    },
    Forget {
        #[arg(long)]
        word: String,
        #[arg(long)]
        strand: usize,
    },
    Kernel {
        #[arg(long)]
        word: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// all, a module name, or a criterion number.
    #[arg(long, default_value = "all")]
    suite: String,
}

enum Output {
    Json(Value),
    Text(String),
}

enum Failure {
    /// Bad flags or input: exit 2.
    Input(String),
    /// A check ran and failed: exit 1.
    Check { result: Value, details: Value },
}

impl From<monodromy_core::Error> for Failure {
    fn from(e: monodromy_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<Output, Failure>;

fn read_json(path: &str) -> Result<Value, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    }
    parse_json(&text)
}

fn parse_json(text: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("invalid JSON: {e}")))
}

fn class(v: &[i64]) -> Result<[i64; 2], Failure> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(Failure::Input(format!("expected two integers, got {v:?}"))),
    }
}

fn check(passed: bool, result: Value) -> Run {
    if passed {
        Ok(Output::Json(result))
    } else {
        Err(Failure::Check { details: result.clone(), result })
    }
}

fn run_polygon(cmd: PolygonCmd) -> Run {
    Ok(match cmd {
        PolygonCmd::DParam { k, n } => Output::Json(json!({"k": k, "n": n, "d": polygon::d_param(k, n)?})),
        PolygonCmd::Diagonals(PolygonSize { d, n }) => {
            let pairs: Vec<(usize, usize)> = polygon::enumerate_n_diagonals(d, n)?.iter().map(|x| x.pair()).collect();
            Output::Json(json!({"d": d, "n": n, "count": pairs.len(), "diagonals": pairs}))
        }
        PolygonCmd::Angulations(PolygonSize { d, n }) => {
            let all = polygon::enumerate_n_angulations(d, n)?;
            let list: Vec<Value> = all.iter().map(|a| a.to_json()).collect();
            Output::Json(json!({"d": d, "n": n, "count": list.len(), "angulations": list}))
        }
        PolygonCmd::ExchangeGraph { size, format } => {
            let eg = polygon::exchange_graph(size.d, size.n)?;
            match format {
                Format::Dot => Output::Text(eg.to_dot()),
                Format::Json => Output::Json(eg.to_json()),
            }
        }
        PolygonCmd::Automorphisms(PolygonSize { d, n }) => {
            let eg = polygon::exchange_graph(d, n)?;
            let aut = eg.automorphisms()?;
            let order = (d as i64).max(1);
            let rotations_free = (1..order).all(|r| eg.rotation_permutation(r).iter().enumerate().all(|(i, &j)| i != j));
            Output::Json(json!({
                "vertices": eg.graph.vertex_count(),
                "automorphisms": aut,
                "rotations_act_freely": rotations_free,
            }))
        }
    })
}

fn run_surface(cmd: SurfaceCmd) -> Run {
    Ok(match cmd {
        SurfaceCmd::Counts(SurfaceSpec { g, d }) => {
            let s = surface::build_surface(g, &d)?;
            let (arcs, triangles) = surface::expected_counts(&s);
            Output::Json(json!({"g": g, "d": d, "arcs": arcs, "triangles": triangles, "euler_characteristic": s.euler_characteristic()}))
        }
        SurfaceCmd::Seed(SurfaceSpec { g, d }) => {
            Output::Json(IdealTriangulation::seed(&surface::build_surface(g, &d)?)?.to_json())
        }
        SurfaceCmd::Validate { input } => {
            let t = IdealTriangulation::from_json(&read_json(&input)?)?;
            let report = t.validate();
            let value = serde_json::to_value(&report).expect("serializable report");
            return check(report.passed(), value);
        }
        SurfaceCmd::Flip { input, arc } => {
            let t = IdealTriangulation::from_json(&read_json(&input)?)?;
            Output::Json(t.flip(arc)?.to_json())
        }
        SurfaceCmd::Quiver { input } => {
            let t = IdealTriangulation::from_json(&read_json(&input)?)?;
            Output::Json(surface::dual_quiver_with_potential(&t).to_json())
        }
        SurfaceCmd::Compatible { input } => {
            let t = IdealTriangulation::from_json(&read_json(&input)?)?;
            let mut arcs = Vec::new();
            let mut ok = true;
            for a in 0..t.arc_count {
                match surface::flip_mutation_compatible(&t, a) {
                    Ok(c) => {
                        ok &= c;
                        arcs.push(json!({"arc": a, "compatible": c}));
                    }
                    Err(monodromy_core::Error::FlipUndefined(_)) => arcs.push(json!({"arc": a, "flippable": false})),
                    Err(e) => return Err(e.into()),
                }
            }
            return check(ok, json!({"compatible": ok, "arcs": arcs}));
        }
        SurfaceCmd::Graph { spec, depth, format } => {
            let seed = IdealTriangulation::seed(&surface::build_surface(spec.g, &spec.d)?)?;
            let graph = surface::triangulation_graph(&seed, depth)?;
            match format {
                Format::Dot => Output::Text(graph.to_dot()),
                Format::Json => Output::Json(graph.to_json()),
            }
        }
    })
}

fn exchange_matrix_from(v: &Value) -> Result<ExchangeMatrix, Failure> {
    if v.get("arrows").is_some() {
        return Ok(QuiverWithPotential::from_json(v)?.exchange_matrix());
    }
    let rows = v.get("b").unwrap_or(v);
    let b: Vec<Vec<i64>> =
        serde_json::from_value(rows.clone()).map_err(|e| Failure::Input(format!("expected a quiver or a matrix: {e}")))?;
    Ok(ExchangeMatrix::new(b)?)
}

fn run_quiver(cmd: QuiverCmd) -> Run {
    Ok(match cmd {
        QuiverCmd::Named { name, k } => Output::Json(
            match name {
                NamedQuiver::DoubleBubble => quiver::double_bubble_quiver(),
                NamedQuiver::Conifold => quiver::conifold_quiver(),
                NamedQuiver::A => quiver::a_k_quiver(k)?,
            }
            .to_json(),
        ),
        QuiverCmd::Mutate { input, vertex } => {
            let b = exchange_matrix_from(&read_json(&input)?)?;
            Output::Json(json!({"b": b.mutate(vertex)?.b}))
        }
        QuiverCmd::Euler { input } => {
            let q = QuiverWithPotential::from_json(&read_json(&input)?)?;
            Output::Json(json!({"euler": quiver::euler_pairing_cy3(&q)}))
        }
    })
}

fn words(images: &[FreeWord]) -> Vec<String> {
    images.iter().map(|w| w.to_string()).collect()
}

fn run_braid(cmd: BraidCmd) -> Run {
    Ok(match cmd {
        BraidCmd::Images { strands, word } => {
            let w = BraidWord::parse(strands, &word)?;
            Output::Json(json!({"word": w.to_string(), "images": words(&w.generator_images())}))
        }
        BraidCmd::Eq { strands, lhs, rhs } => {
            let (a, b) = (BraidWord::parse(strands, &lhs)?, BraidWord::parse(strands, &rhs)?);
            Output::Json(json!({"equal": braid::braid_eq(&a, &b)}))
        }
        BraidCmd::Permutation { strands, word } => {
            let w = BraidWord::parse(strands, &word)?;
            Output::Json(json!({"permutation": w.permutation(), "pure": w.is_pure()}))
        }
        BraidCmd::Endpoints { strands, arc } => {
            let a = Arc::new(BraidWord::parse(strands, &arc.word)?, arc.base)?;
            Output::Json(json!({"arc": a.to_json(), "endpoints": braid::endpoints(&a)}))
        }
        BraidCmd::Compare { strands, word1, base1, word2, base2 } => {
            let a1 = Arc::new(BraidWord::parse(strands, &word1)?, base1)?;
            let a2 = Arc::new(BraidWord::parse(strands, &word2)?, base2)?;
            Output::Json(json!({
                "endpoints": [braid::endpoints(&a1), braid::endpoints(&a2)],
                "interior_intersection": braid::interior_intersection(&a1, &a2)?,
                "rank_class": braid::hf_rank_class(&a1, &a2)?,
            }))
        }
    })
}

fn run_groupoid(cmd: GroupoidCmd) -> Run {
    Ok(match cmd {
        GroupoidCmd::Rigidity => {
            let ok = groupoid::only_identity_is_permutation();
            return check(ok, json!({"composites": groupoid::six_composites(), "only_identity_is_permutation": ok}));
        }
        GroupoidCmd::Eq { lhs, rhs } => {
            let (f, g) = (GroupoidMorphism::parse(&lhs)?, GroupoidMorphism::parse(&rhs)?);
            Output::Json(json!({"equal": groupoid::morphism_eq(&f, &g)?}))
        }
        GroupoidCmd::Describe { morphism } => {
            let f = GroupoidMorphism::parse(&morphism)?;
            let braid = f.realization();
            Output::Json(json!({
                "morphism": f.to_string(),
                "source": f.source.name(),
                "target": f.target().name(),
                "braid": braid.to_string(),
                "permutation": braid.permutation(),
                "k_matrix": f.k_matrix(),
                "pure_loop": f.is_pure_loop(),
            }))
        }
        GroupoidCmd::Enumerate { max_len } => {
            let e = groupoid::enumerate_to_base(max_len);
            let per: serde_json::Map<String, Value> =
                e.per_source.iter().map(|(c, k)| (c.name().to_string(), json!(k))).collect();
            Output::Json(json!({"max_len": max_len, "total": e.total, "per_source": per}))
        }
    })
}

fn fibration(spec: &FibrationSpec) -> Result<Fibration, Failure> {
    let flux = match &spec.flux {
        None => None,
        Some(parts) if parts.len() == 2 => {
            let q = |s: &String| flux::parse_q(&Value::String(s.clone()));
            Some([q(&parts[0])?, q(&parts[1])?])
        }
        Some(parts) => return Err(Failure::Input(format!("--flux takes two entries, got {}", parts.len()))),
    };
    match (&spec.fibration, spec.preset) {
        (Some(path), _) => {
            if flux.is_some() {
                return Err(Failure::Input("--flux only applies to presets".into()));
            }
            Ok(Fibration::from_json(&read_json(path)?)?)
        }
        (None, Some(Preset::W0)) => Ok(Fibration::w0(flux)),
        (None, Some(Preset::Conifold)) | (None, None) => Ok(Fibration::conifold(flux)),
    }
}

fn path_from(fib: &Fibration, text: &str) -> Result<MatchingPath, Failure> {
    Ok(MatchingPath::from_json(fib, &parse_json(text)?)?)
}

fn run_flux(cmd: FluxCmd) -> Run {
    Ok(match cmd {
        FluxCmd::Twist { v } => {
            let v = class(&v)?;
            Output::Json(json!({"class": v, "matrix": flux::dehn_twist_matrix(v)?}))
        }
        FluxCmd::Monodromy { fib, path } => {
            let fib = fibration(&fib)?;
            let verts = parse_json(&path)?;
            let verts = verts
                .as_array()
                .ok_or_else(|| Failure::Input("a path is a JSON vertex list".into()))?
                .iter()
                .map(flux::parse_q2)
                .collect::<Result<Vec<_>, _>>()?;
            Output::Json(flux::monodromy_along(&verts, &fib)?.to_json())
        }
        FluxCmd::Matching { fib, path } => {
            let fib = fibration(&fib)?;
            let p = path_from(&fib, &path)?;
            Output::Json(flux::matching_data(&p, &fib)?.to_json())
        }
        FluxCmd::Disjoint { fib, path1, path2 } => {
            let fib = fibration(&fib)?;
            let (p1, p2) = (path_from(&fib, &path1)?, path_from(&fib, &path2)?);
            Output::Json(flux::spheres_disjoint(&p1, &p2, &fib)?.to_json())
        }
        FluxCmd::Family { fib, n } => {
            let fib = fibration(&fib)?;
            let family = flux::wrapped_family(&fib, n)?;
            let verdicts = flux::family_verdicts(&fib, &family)?;
            let disjoint = verdicts.iter().filter(|(_, v)| v.is_disjoint()).count();
            let pairs: Vec<Value> =
                verdicts.iter().map(|((i, j), v)| json!({"pair": [i, j], "result": v.to_json()})).collect();
            Output::Json(json!({
                "fibration": fib.to_json(),
                "paths": family.iter().map(MatchingPath::to_json).collect::<Vec<_>>(),
                "pairs": pairs,
                "disjoint": disjoint,
                "total": verdicts.len(),
            }))
        }
        FluxCmd::Surgery { v1, v2 } => {
            Output::Json(json!({"surgery": flux::surgery_type(class(&v1)?, class(&v2)?)?.to_string()}))
        }
        FluxCmd::Forget { word, strand } => {
            let w = BraidWord::parse(3, &word)?;
            let f = flux::forget_strand(&w, strand)?;
            let trivial = braid::braid_eq(&f, &BraidWord::identity(f.strands));
            Output::Json(json!({"word": f.to_string(), "trivial": trivial}))
        }
        FluxCmd::Kernel { word } => {
            let w = BraidWord::parse(3, &word)?;
            let nontrivial = !braid::braid_eq(&w, &BraidWord::identity(3));
            Output::Json(json!({"in_kernel": flux::in_kernel(&w)?, "nontrivial": nontrivial}))
        }
    })
}

fn suite_ids(suite: &str) -> Result<Vec<u8>, Failure> {
    let ids: Vec<u8> = match suite {
        "all" => CRITERIA.iter().map(|c| c.0).collect(),
        "polygon" => vec![1, 2, 3],
        "surface" => vec![4, 5, 6],
        "quiver" => vec![5, 6],
        "braid" => vec![7, 8],
        "groupoid" => vec![9, 10],
        "flux" => vec![11, 12, 13],
        other => match other.parse::<u8>() {
            Ok(i) if CRITERIA.iter().any(|c| c.0 == i) => vec![i],
            _ => return Err(Failure::Input(format!("unknown suite {other:?}"))),
        },
    };
    Ok(ids)
}

fn run_verify(args: VerifyArgs, seed: u64) -> Run {
    let ids = suite_ids(&args.suite)?;
    let results: Vec<verify::CriterionResult> = if args.suite == "all" {
        verify::run_all(seed)
    } else {
        ids.iter().filter_map(|&i| verify::run_criterion(i, seed)).collect()
    };
    for r in &results {
        eprintln!("[{}] {:>2}. {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name);
    }
    let failed: Vec<&verify::CriterionResult> = results.iter().filter(|r| !r.passed).collect();
    let result = json!({"suite": args.suite, "seed": seed, "results": results, "passed": failed.is_empty()});
    if failed.is_empty() {
        Ok(Output::Json(result))
    } else {
        Err(Failure::Check { details: json!({"failed": failed}), result })
    }
}

fn run(cli: Cli) -> Run {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Polygon(c) => run_polygon(c),
        Command::Surface(c) => run_surface(c),
        Command::Quiver(c) => run_quiver(c),
        Command::Braid(c) => run_braid(c),
        Command::Groupoid(c) => run_groupoid(c),
        Command::Flux(c) => run_flux(c),
        Command::Verify(a) => run_verify(a, cli.seed),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn print_json(v: &Value) {
    emit(&format!("{v}\n"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Output::Json(v)) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Err(Failure::Check { result, details }) => {
            print_json(&result);
            eprintln!("{}", serde_json::to_string(&details).expect("serializable"));
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("{}", json!({"error": msg}));
            ExitCode::from(2)
        }
    }
}
