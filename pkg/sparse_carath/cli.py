"""Main CLI interface for sparse-carath."""

import json
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np
import typer
from rich.markup import escape
from rich.table import Table

from . import __version__
from .caratheodory import SparsifyRequest, count_uniform, khintchine_check, sparsify, sparsify_infinity
from .core import CarathError, ExhaustedError, InputError, NormSpec, PointSet, as_vector
from .geometry import (
    ColorClasses,
    DoublyStochastic,
    TverbergInstance,
    approx_bvn,
    birkhoff_decompose,
    find_rainbow,
    find_tverberg_partition,
)
from .lower_bound import LowerBoundCase, verify_lower_bound
from .nash import (
    BimatrixGame,
    MixedProfile,
    SolveConfig,
    exact_nash_oracle,
    solve_both_sparse,
    solve_max_welfare,
    solve_scaled_game,
    solve_small_prob,
    solve_sparse_nash,
    sparsity,
    verify_eps_nash,
)
from .subgraph import (
    Graph,
    NDkSInstance,
    dkbs_bruteforce,
    dkbs_exponent,
    ndks_bruteforce,
    ndks_exponent,
    solve_dkbs,
    solve_ndks,
)
from .utils import DEFAULT_CONFIG, console, display_summary, load_config, to_json

app = typer.Typer(
    name="sparse-carath",
    help="Sparse convex combinations: sparsification, sparse-game equilibria, dense subgraphs and geometry",
    rich_markup_mode="rich",
)
nash_app = typer.Typer(help="Equilibria of sparse bimatrix games")
ndks_app = typer.Typer(help="Normalized densest k-subgraph")
dkbs_app = typer.Typer(help="Densest k x k bipartite subgraph")
bvn_app = typer.Typer(help="Birkhoff-von Neumann decompositions")
app.add_typer(nash_app, name="nash")
app.add_typer(ndks_app, name="ndks")
app.add_typer(dkbs_app, name="dkbs")
app.add_typer(bvn_app, name="bvn")

# Filled by the callback; commands read run settings from here.
state: Dict[str, Any] = {"config": dict(DEFAULT_CONFIG)}

EXIT_INPUT = 1
EXIT_NOT_FOUND = 2
LARGE_SEARCH = 10**6

EPS_OPTION = typer.Option(None, "--eps", help="Accuracy eps (default from config)")
SEED_OPTION = typer.Option(None, "--seed", help="Random seed (default from config)")
KAPPA_OPTION = typer.Option(None, "--kappa", help="Multiset-size constant kappa")
MAX_MULTISET_OPTION = typer.Option(
    None,
    "--max-multiset",
    help="Cap on the enumerated multiset size. The default ceil(kappa p / eps^2) is only practical for tiny inputs",
)
NORM_MODE_OPTION = typer.Option(None, "--norm-mode", help="CP residual norm: 'inf' (LP) or 'p'")
OUTPUT_OPTION = typer.Option(None, "--output", "-o", help="Write the JSON result here instead of stdout")
GAME_OPTION = typer.Option(..., "--game", "-g", help="Game JSON file with payoff matrices A and B")
GRAPH_OPTION = typer.Option(..., "--graph", help="Graph JSON file {\"n\": int, \"edges\": [[u, v], ...]}")


@app.callback()
def main_callback(
    config_file: Optional[Path] = typer.Option(None, "--config", help="Configuration file path"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Silence progress output on stderr"),
) -> None:
    """sparse-carath: constructive approximate Carathéodory and its applications."""
    console.quiet = quiet
    try:
        state["config"] = load_config(str(config_file) if config_file else None)
    except (FileNotFoundError, ValueError) as e:
        console.print(f"[red]Error:[/red] config: {escape(str(e))}", soft_wrap=True)
        raise typer.Exit(EXIT_INPUT)
    console.print(f"[dim]sparse-carath {__version__}[/dim]")


def _setting(name: str, value: Any) -> Any:
    """CLI value if given, otherwise the config file / default value."""
    return state["config"][name] if value is None else value


def _read_json(path: Path, field: str) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(field, f"file '{path}' not found")
    except json.JSONDecodeError as e:
        raise InputError(field, f"malformed JSON in '{path}': {e.msg} (line {e.lineno})")


def _parse_json_arg(text: str, field: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(field, f"malformed JSON: {e.msg}")


def _object_key(data: Any, key: str, field: str) -> Any:
    if isinstance(data, dict):
        if key not in data:
            raise InputError(key, f"missing from {field} file")
        return data[key]
    return data


def _emit(payload: Dict[str, Any], output: Optional[Path]) -> None:
    text = to_json(payload)
    if output is None:
        typer.echo(text)
        return
    output.write_text(text + "\n")
    console.print(f"[green]✓[/green] Result written to {output}")


def _run(action: Callable[[], Dict[str, Any]], output: Optional[Path]) -> None:
    """Run a command body and map its outcome to an exit code."""
    try:
        payload = action()
    except ExhaustedError as e:
        console.print(f"[yellow]Exhausted:[/yellow] {escape(str(e))}", soft_wrap=True)
        _emit(e.payload, output)
        raise typer.Exit(EXIT_NOT_FOUND)
    except (CarathError, ValueError) as e:
        console.print(f"[red]Error:[/red] {escape(str(e))}", soft_wrap=True)
        raise typer.Exit(EXIT_INPUT)

    _emit(payload, output)
    if payload.get("status") in ("NOT_FOUND", "EXHAUSTED", "FAIL"):
        raise typer.Exit(EXIT_NOT_FOUND)


def _solve_config(
    eps: Optional[float],
    kappa: Optional[float],
    norm_mode: Optional[str],
    max_multiset: Optional[int],
    seed: Optional[int],
    randomized: bool = False,
    welfare_floor: Optional[float] = None,
) -> SolveConfig:
    config = state["config"]
    return SolveConfig(
        eps=float(_setting("eps", eps)),
        kappa=float(_setting("kappa", kappa)),
        norm_mode=_setting("norm_mode", norm_mode),
        max_multiset_size=_setting("max_multiset", max_multiset),
        welfare_floor=welfare_floor,
        seed=int(_setting("seed", seed)),
        randomized_mode=randomized,
        randomized_trials=int(config["randomized_trials"]),
        solve_tol=float(config["solve_tol"]),
    )


def _warn_large_search(cfg: SolveConfig, n: int, p: float) -> None:
    """Point at --max-multiset when the default size cap implies an enormous enumeration."""
    if cfg.max_multiset_size is not None or cfg.randomized_mode:
        return
    cap = cfg.multiset_cap(p)
    if count_uniform(n, cap) > LARGE_SEARCH:
        console.print(
            f"[yellow]Warning:[/yellow] size cap {cap} allows more than {LARGE_SEARCH:,} candidate "
            "multisets; pass --max-multiset to bound the search",
            soft_wrap=True,
        )


def _load_game(path: Path) -> BimatrixGame:
    return BimatrixGame.from_dict(_read_json(path, "game"))


def _load_graph(path: Path) -> Graph:
    return Graph.from_dict(_read_json(path, "graph"))


@app.command("sparsify")
def sparsify_command(
    input_file: Path = typer.Option(..., "--input", "-i", help="JSON with 'points', 'target' and 'weights'"),
    p: str = typer.Option("2", "--p", help="Norm exponent >= 2 or 'inf'"),
    eps: Optional[float] = EPS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    max_retries: Optional[int] = typer.Option(None, "--max-retries", help="Sampling attempts"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Replace a convex combination by a uniform combination of few points."""

    def action() -> Dict[str, Any]:
        data = _read_json(input_file, "input")
        if not isinstance(data, dict) or "points" not in data or "target" not in data:
            raise InputError("input", "expected a JSON object with 'points' and 'target'")
        norm = NormSpec.parse(p)
        request = SparsifyRequest(
            PointSet(data["points"]),
            data["target"],
            data.get("weights"),
            float(_setting("eps", eps)),
            norm,
            int(_setting("max_retries", max_retries)),
        )
        run_seed = int(_setting("seed", seed))
        if norm.is_inf:
            result = sparsify_infinity(request, run_seed, float(state["config"]["delta_fail"]))
        else:
            result = sparsify(request, run_seed)
        display_summary(
            "Sparsification",
            {
                "Samples m": result.sample_count_m,
                "Distinct points": len(set(result.combination.multiset)),
                "Distance": result.achieved_distance,
                "Retries": result.retries_used,
            },
        )
        return {"status": "OK", **result.to_dict()}

    _run(action, output)


@app.command("khintchine")
def khintchine_command(
    vectors_file: Path = typer.Option(..., "--vectors", help="JSON list of vectors (or {'vectors': [...]})"),
    p: str = typer.Option("2", "--p", help="Finite norm exponent >= 2"),
    trials: int = typer.Option(10000, "--trials", help="Number of Rademacher sign draws"),
    seed: Optional[int] = SEED_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Compare E||sum r_i u_i||_p with sqrt(p) (sum ||u_i||_p^2)^(1/2) empirically."""

    def action() -> Dict[str, Any]:
        vectors = _object_key(_read_json(vectors_file, "vectors"), "vectors", "vectors")
        if not isinstance(vectors, list) or not vectors:
            raise InputError("vectors", "expected a non-empty list of vectors")
        lhs, rhs = khintchine_check(
            [as_vector(v, "vectors") for v in vectors], NormSpec.parse(p), trials, int(_setting("seed", seed))
        )
        return {
            "status": "OK",
            "mean_norm": lhs,
            "bound": rhs,
            "ratio": lhs / rhs if rhs > 0 else 0.0,
            "holds": bool(lhs <= rhs),
        }

    _run(action, output)


@nash_app.command("solve")
def nash_solve(
    game_file: Path = GAME_OPTION,
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    norm_mode: Optional[str] = NORM_MODE_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    seed: Optional[int] = SEED_OPTION,
    randomized: bool = typer.Option(False, "--randomized", help="Sample multisets instead of enumerating"),
    welfare_floor: Optional[float] = typer.Option(None, "--welfare-floor", help="Require pi1 + pi2 >= this"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Find an eps-Nash equilibrium of a sparse game."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        cfg = _solve_config(eps, kappa, norm_mode, max_multiset, seed, randomized, welfare_floor)
        _warn_large_search(cfg, game.n, sparsity(game).p)
        with console.status("[bold green]Enumerating candidate multisets..."):
            certificate = solve_sparse_nash(game, cfg)
        _show_certificate(certificate.to_dict())
        return certificate.to_dict()

    _run(action, output)


@nash_app.command("verify")
def nash_verify(
    game_file: Path = GAME_OPTION,
    x: str = typer.Option(..., "--x", help="Row strategy as a JSON list"),
    y: str = typer.Option(..., "--y", help="Column strategy as a JSON list"),
    eps: Optional[float] = typer.Option(None, "--eps", help="Also report whether the profile is eps-Nash"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Recompute the regrets of a strategy profile."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        profile = MixedProfile(
            as_vector(_parse_json_arg(x, "x"), "x"),
            as_vector(_parse_json_arg(y, "y"), "y"),
        )
        payload = verify_eps_nash(game, profile).to_dict()
        if eps is not None:
            payload["eps"] = eps
            payload["eps_nash"] = max(payload["row_regret"], payload["col_regret"]) <= eps
        _show_certificate(payload)
        return payload

    _run(action, output)


@nash_app.command("oracle")
def nash_oracle(
    game_file: Path = GAME_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """List the equilibria of a small game (n <= 5) by exact support enumeration."""

    def action() -> Dict[str, Any]:
        equilibria = exact_nash_oracle(_load_game(game_file))
        console.print(f"[green]✓[/green] {len(equilibria)} equilibria found")
        return {"status": "OK", "equilibria": [profile.to_dict() for profile in equilibria]}

    _run(action, output)


@nash_app.command("small-prob")
def nash_small_prob(
    game_file: Path = GAME_OPTION,
    m: int = typer.Option(..., "--m", help="Promised bound: every probability is at most 1/m"),
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Solve a game promised to have an equilibrium with small probabilities."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        cfg = _solve_config(eps, kappa, "p", max_multiset, seed)
        certificate = solve_small_prob(game, m, cfg)
        _show_certificate(certificate.to_dict())
        return certificate.to_dict()

    _run(action, output)


@nash_app.command("both-sparse")
def nash_both_sparse(
    game_file: Path = GAME_OPTION,
    s: Optional[int] = typer.Option(None, "--s", help="Declared sparsity of A-columns and B-rows (checked)"),
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    norm_mode: Optional[str] = NORM_MODE_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Solve a game whose A-columns and B-rows are sparse."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        certificate = solve_both_sparse(game, _solve_config(eps, kappa, norm_mode, max_multiset, None), s)
        _show_certificate(certificate.to_dict())
        return certificate.to_dict()

    _run(action, output)


@nash_app.command("scaled")
def nash_scaled(
    game_file: Path = GAME_OPTION,
    alpha: float = typer.Option(1.0, "--alpha", help="Row payoff scale"),
    beta: float = typer.Option(1.0, "--beta", help="Column payoff scale"),
    gamma: float = typer.Option(0.0, "--gamma", help="Constant added to the column payoffs"),
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    norm_mode: Optional[str] = NORM_MODE_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Solve (alpha A, beta B + gamma) and certify the profile on the original game."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        cfg = _solve_config(eps, kappa, norm_mode, max_multiset, None)
        certificate = solve_scaled_game(game, alpha, beta, gamma, cfg)
        _show_certificate(certificate.to_dict())
        return certificate.to_dict()

    _run(action, output)


@nash_app.command("welfare")
def nash_welfare(
    game_file: Path = GAME_OPTION,
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    norm_mode: Optional[str] = NORM_MODE_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Find an eps-Nash equilibrium with near-maximal welfare."""

    def action() -> Dict[str, Any]:
        game = _load_game(game_file)
        certificate = solve_max_welfare(game, _solve_config(eps, kappa, norm_mode, max_multiset, None))
        _show_certificate(certificate.to_dict())
        return certificate.to_dict()

    _run(action, output)


def _show_certificate(payload: Dict[str, Any]) -> None:
    display_summary(
        "Equilibrium certificate",
        {
            "Row regret": payload["row_regret"],
            "Column regret": payload["col_regret"],
            "Multiset": payload.get("u_used"),
            "Residual": payload.get("residual"),
        },
    )


@ndks_app.command("solve")
def ndks_solve(
    graph_file: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", help="Subgraph size (k >= 2)"),
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Additive-eps normalized densest k-subgraph."""

    def action() -> Dict[str, Any]:
        inst = NDkSInstance(_load_graph(graph_file), k)
        cfg = _solve_config(eps, kappa, None, max_multiset, None)
        _warn_large_search(cfg, inst.graph.n, ndks_exponent(inst.graph))
        return solve_ndks(inst, cfg, int(state["config"]["ascent_steps"])).to_dict()

    _run(action, output)


@ndks_app.command("brute")
def ndks_brute(
    graph_file: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", help="Subgraph size (k >= 2)"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Exact densest k-subgraph by exhaustive search."""
    _run(lambda: ndks_bruteforce(NDkSInstance(_load_graph(graph_file), k)).to_dict(), output)


@dkbs_app.command("solve")
def dkbs_solve(
    graph_file: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", help="Size of each side"),
    eps: Optional[float] = EPS_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    max_multiset: Optional[int] = MAX_MULTISET_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Additive-eps densest k x k bipartite subgraph."""

    def action() -> Dict[str, Any]:
        graph = _load_graph(graph_file)
        cfg = _solve_config(eps, kappa, None, max_multiset, None)
        _warn_large_search(cfg, graph.n, dkbs_exponent(graph))
        return solve_dkbs(graph, k, cfg).to_dict()

    _run(action, output)


@dkbs_app.command("brute")
def dkbs_brute(
    graph_file: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", help="Size of each side"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Exact densest k x k bipartite subgraph by exhaustive search."""
    _run(lambda: dkbs_bruteforce(_load_graph(graph_file), k).to_dict(), output)


def _load_doubly_stochastic(path: Path) -> DoublyStochastic:
    return DoublyStochastic(_object_key(_read_json(path, "matrix"), "D", "matrix"))


@bvn_app.command("decompose")
def bvn_decompose(
    matrix_file: Path = typer.Option(..., "--matrix", help="Doubly stochastic matrix (JSON list or {'D': ...})"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Exact Birkhoff-von Neumann decomposition."""

    def action() -> Dict[str, Any]:
        D = _load_doubly_stochastic(matrix_file)
        decomposition = birkhoff_decompose(D, float(state["config"]["match_tol"]))
        error = float(np.max(np.abs(decomposition.matrix() - D.D)))
        console.print(f"[green]✓[/green] {len(decomposition.perms)} permutations, error {error:.3g}")
        return {**decomposition.to_dict(), "reconstruction_error": error}

    _run(action, output)


@bvn_app.command("approx")
def bvn_approx(
    matrix_file: Path = typer.Option(..., "--matrix", help="Doubly stochastic matrix (JSON list or {'D': ...})"),
    eps: Optional[float] = EPS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    max_retries: Optional[int] = typer.Option(None, "--max-retries", help="Sampling attempts"),
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Uniform combination of few permutations, entrywise within eps of D."""

    def action() -> Dict[str, Any]:
        D = _load_doubly_stochastic(matrix_file)
        decomposition = approx_bvn(
            D,
            float(_setting("eps", eps)),
            int(_setting("seed", seed)),
            int(_setting("max_retries", max_retries)),
        )
        return {**decomposition.to_dict(), "k": len(decomposition.perms)}

    _run(action, output)


@app.command("rainbow")
def rainbow_command(
    input_file: Path = typer.Option(..., "--input", "-i", help="JSON with 'classes' (d+1 point lists) and 'mu'"),
    p: str = typer.Option("2", "--p", help="Norm exponent >= 2 or 'inf'"),
    eps: Optional[float] = EPS_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Find a rainbow whose hull comes within eps of mu."""

    def action() -> Dict[str, Any]:
        classes = ColorClasses.from_dict(_read_json(input_file, "input"))
        return find_rainbow(classes, float(_setting("eps", eps)), NormSpec.parse(p)).to_dict()

    _run(action, output)


@app.command("tverberg")
def tverberg_command(
    points_file: Path = typer.Option(..., "--points", help="JSON list of (r-1)(d+1)+1 points (or {'points': ...})"),
    r: int = typer.Option(..., "--r", help="Number of parts"),
    p: str = typer.Option("2", "--p", help="Norm exponent >= 2 or 'inf'"),
    eps: Optional[float] = EPS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Partition points into r parts whose hulls are concurrently eps-close."""

    def action() -> Dict[str, Any]:
        points = PointSet(_object_key(_read_json(points_file, "points"), "points", "points"))
        inst = TverbergInstance(points, r, float(_setting("eps", eps)), NormSpec.parse(p))
        config = state["config"]
        result = find_tverberg_partition(
            inst,
            int(config["concurrent_starts"]),
            int(config["concurrent_iterations"]),
            int(_setting("seed", seed)),
        )
        return result.to_dict()

    _run(action, output)


@app.command("lowerbound")
def lowerbound_command(
    d: int = typer.Option(..., "--d", help="Dimension"),
    p: float = typer.Option(2.0, "--p", help="Finite norm exponent >= 2"),
    eps: Optional[float] = EPS_OPTION,
    output: Optional[Path] = OUTPUT_OPTION,
) -> None:
    """Check that fewer than 1/(4 eps^(p/(p-1))) basis vectors stay eps away from the barycenter."""

    def action() -> Dict[str, Any]:
        report = verify_lower_bound(LowerBoundCase(d, p, float(_setting("eps", eps))))
        table = Table(title=f"Lower bound d={d}, p={p:g}")
        table.add_column("k", style="cyan")
        table.add_column("distance", style="green")
        table.add_column("margin", style="green")
        for row in report.rows:
            table.add_row(str(row.k), f"{row.distance:.6g}", f"{row.margin:.6g}")
        console.print(table)
        verdict = "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"
        console.print(f"{verdict} min distance {report.min_distance:.6g}")
        return report.to_dict()

    _run(action, output)


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
