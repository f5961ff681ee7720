"""Input parsing, pipeline orchestration, reports and the batch harness."""
import asyncio
import csv
import io
import json
import logging
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from hyplat import config
from hyplat.cone import ConeFrame, GramLattice, make_frame
from hyplat.errors import (
    AsymmetricMatrixError, GraphError, HyplatError, InputError, MatrixParseError, OrbitBudgetError,
)
from hyplat.exact_linalg import IntMatrix, is_symmetric
from hyplat.models import (
    AutReport, ClassReport, EdgeReport, JobSpec, VerificationReport, WatsonReport, decode_matrix, encode_matrix,
    encode_vector,
)
from hyplat.profiling import profile_block
from hyplat.voronoi import GeneratorSet, ResidueGraph, check_generators, traverse, verify
from hyplat.watson import LatticeInSpace, recover_aut, watson

logger = logging.getLogger(__name__)

CSV_HEADER = [
    "index", "seed", "matrix", "det", "watson_applied", "watson_det", "classes_direct",
    "classes_watson", "generators_direct", "seconds_direct", "seconds_watson",
]

_TOKEN = re.compile(r"\S+")


# --- Input parsing ---

def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.lstrip().startswith("#"):
            continue
        for m in _TOKEN.finditer(line):
            yield m.group(), lineno, m.start() + 1


def _parse_int(token: str, line: int, col: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixParseError(f"expected an integer, got {token!r}", line, col) from None


def _check_matrix(M) -> IntMatrix:
    if not isinstance(M, list) or not M or not all(isinstance(row, list) for row in M):
        raise MatrixParseError("expected a non-empty array of arrays")
    n = len(M)
    for row in M:
        if len(row) != n:
            raise MatrixParseError(f"expected {n} entries per row, got {len(row)}")
        if not all(isinstance(a, int) and not isinstance(a, bool) for a in row):
            raise MatrixParseError("matrix entries must be integers")
    return M


def parse_matrix(text: str) -> IntMatrix:
    """Read `n a11 a12 ... ann` or a JSON array of arrays; the result must be symmetric."""
    text = text.replace("−", "-")
    if text.lstrip().startswith("["):
        try:
            M = json.loads(text)
        except json.JSONDecodeError as e:
            raise MatrixParseError(e.msg, e.lineno, e.colno) from None
        M = _check_matrix(M)
    else:
        tokens = list(_tokens(text))
        if not tokens:
            raise MatrixParseError("empty input")
        n = _parse_int(*tokens[0])
        if n < 1:
            raise MatrixParseError(f"dimension must be positive, got {n}", tokens[0][1], tokens[0][2])
        entries = tokens[1:]
        if len(entries) != n * n:
            if len(entries) > n * n:
                _, line, col = entries[n * n]
            else:
                _, line, col = tokens[-1]
            raise MatrixParseError(f"expected {n * n} entries after the dimension, got {len(entries)}", line, col)
        values = [_parse_int(*t) for t in entries]
        M = [values[i * n:(i + 1) * n] for i in range(n)]
    if not is_symmetric(M):
        raise AsymmetricMatrixError("matrix is not symmetric")
    return M


def parse_edge_list(text: str) -> Tuple[List[Tuple[int, int]], int]:
    """One `i j` pair per line, `#` comments, optional leading `n <count>` line."""
    edges = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two fields, got {len(parts)}")
        if parts[0] == "n" and n is None and not edges:
            n = _graph_int(parts[1], lineno)
            continue
        edges.append((_graph_int(parts[0], lineno), _graph_int(parts[1], lineno)))
    if n is None:
        n = max((max(e) for e in edges), default=0)
    return edges, n


def _graph_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphError(f"line {lineno}: {token!r} is not a vertex number") from None


def graph_to_gram(edges: Sequence[Tuple[int, int]], n: int) -> IntMatrix:
    """2 on the diagonal, -1 for every edge; vertices are numbered 1..n."""
    if n < 1:
        raise GraphError("graph has no vertices")
    M = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in edges:
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphError(f"edge {i}-{j} leaves the vertex range 1..{n}")
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        if M[i - 1][j - 1]:
            raise GraphError(f"edge {i}-{j} listed twice")
        M[i - 1][j - 1] = M[j - 1][i - 1] = -1
    return M


def edge_label(source: int, target: int) -> str:
    return f"c_{{{source},{target}}}"


def write_dot(graph: ResidueGraph) -> str:
    lines = ["graph residue {"]
    for p in graph.points:
        vector = ",".join(str(a) for a in p.vector)
        lines.append(f'  x{p.id} [label="{p.id}: ({vector})"];')
    for e in graph.edges:
        if e.element is None:
            lines.append(f"  x{e.source} -- x{e.target};")
        else:
            lines.append(f'  x{e.source} -- x{e.target} [label="{edge_label(e.source, e.target)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- Pipeline ---

def _class_reports(f: ConeFrame, graph: ResidueGraph) -> List[ClassReport]:
    out = []
    for p, stab in zip(graph.points, graph.stabilizers):
        out.append(ClassReport(
            id=p.id,
            vector=encode_vector(p.vector),
            norm=str(p.norm),
            minimum=str(p.minimum),
            num_minvecs=len(p.minvecs),
            num_directions=p.num_directions,
            num_neighbours=p.num_non_blind(f),
            stabilizer_order=stab.order if stab.order is None or stab.order <= config.GROUP_ORDER_CAP else None,
            stabilizer_generators=[encode_matrix(g) for g in stab.generators],
        ))
    return out


def _edge_reports(graph: ResidueGraph) -> List[EdgeReport]:
    return [EdgeReport(source=e.source, target=e.target,
                       label=edge_label(e.source, e.target) if e.element is not None else None,
                       element=encode_matrix(e.element) if e.element is not None else None)
            for e in graph.edges]


def run_pipeline(A: IntMatrix, mode: str = "auto", check: bool = False,
                 timings: Optional[Dict[str, float]] = None,
                 budget: Optional[int] = None) -> Tuple[AutReport, ResidueGraph]:
    """make_frame, optionally watson, traverse, optionally recover_aut and verify.

    `budget` caps every orbit enumeration of this run; None means the
    configured default.
    """
    with profile_block("frame", timings):
        f = make_frame(A)
    L = LatticeInSpace.standard(A)

    W, chain = L, []
    if mode in ("watson", "auto"):
        with profile_block("watson", timings):
            W, chain = watson(L)
    applied = bool(chain)
    if mode == "watson" and not applied:
        logger.info("no filling applies, traversing the input lattice")

    traversed_frame = make_frame(W.integral_gram()) if applied else f
    with profile_block("traverse", timings):
        graph, gens = traverse(traversed_frame, budget)

    watson_report = None
    final = gens
    if applied:
        with profile_block("recover", timings):
            final = recover_aut(f, L, gens, watson_lattice=W, budget=budget)
        watson_report = WatsonReport(
            applied=True,
            chain=chain,
            determinants=[str(L.determinant), str(W.determinant)],
            basis=encode_matrix(W.basis),
            gram=encode_matrix(W.integral_gram()),
            orbit_size=final.index,
        )
    elif mode != "direct":
        watson_report = WatsonReport(applied=False, determinants=[str(L.determinant)])

    verification = None
    if check:
        with profile_block("verify", timings):
            verification = verify(traversed_frame, graph, gens)
            if applied:
                check_generators(f, final, verification)

    report = AutReport(
        input=encode_matrix(A),
        mode="watson" if applied else "direct",
        determinant=str(f.lattice.detA),
        traversed=encode_matrix(traversed_frame.lattice.A),
        classes=_class_reports(traversed_frame, graph),
        edges=_edge_reports(graph),
        generators=[encode_matrix(g) for g in final.generators],
        minus_identity_included=final.includes_minus_identity,
        watson=watson_report,
        timings=dict(timings or {}),
        verification=verification,
    )
    return report, graph


def load_matrix(job: JobSpec) -> IntMatrix:
    if job.graph_path is not None:
        with open(job.graph_path, encoding="utf-8") as fh:
            edges, n = parse_edge_list(fh.read())
        return graph_to_gram(edges, n)
    if job.matrix_path is not None:
        with open(job.matrix_path, encoding="utf-8") as fh:
            return parse_matrix(fh.read())
    return parse_matrix(job.matrix_text)


def summary_text(report: AutReport) -> str:
    lines = [
        f"mode: {report.mode}",
        f"determinant: {report.determinant}",
        f"classes: {len(report.classes)}",
        f"connecting elements: {report.connecting_elements}",
        f"generators: {len(report.generators)}",
    ]
    if report.watson is not None and report.watson.applied:
        lines.append(f"watson: chain {report.watson.chain}, det {' -> '.join(report.watson.determinants)}")
    for c in report.classes:
        lines.append(f"  x{c.id} = ({', '.join(c.vector)})  N={c.norm} minvecs={c.num_minvecs} "
                     f"neighbours={c.num_neighbours} |Stab|={c.stabilizer_order}")
    if report.verification is not None:
        lines.append("verification: " + ("ok" if report.verification.ok
                                         else f"{len(report.verification.violations)} violations"))
    return "\n".join(lines) + "\n"


def check_report(text: str) -> VerificationReport:
    """Re-check a saved JSON report: generators against its input, stabilizers against the traversed form."""
    try:
        report = AutReport.model_validate_json(text)
        A, traversed = decode_matrix(report.input), decode_matrix(report.traversed)
        gens = GeneratorSet(generators=[decode_matrix(g) for g in report.generators],
                            includes_minus_identity=report.minus_identity_included)
        stabs = [decode_matrix(g) for c in report.classes for g in c.stabilizer_generators]
    except ValidationError as e:
        raise InputError(f"not a report: {e.error_count()} validation errors") from None
    except ValueError as e:
        raise InputError(f"not a report: {e}") from None
    verification = check_generators(make_frame(A), gens)
    check_generators(make_frame(traversed), GeneratorSet(generators=stabs), verification)
    logger.info(f"checked {len(gens.generators)} generators and {len(stabs)} stabilizer generators: "
                f"{len(verification.violations)} violations")
    return verification


def run(job: JobSpec, out=None) -> int:
    """Run one job; returns the process exit code."""
    out = out or sys.stdout
    timings: Optional[Dict[str, float]] = {} if job.include_timings else None
    try:
        A = load_matrix(job)
        with profile_block("total", timings):
            report, graph = run_pipeline(A, job.mode, job.verify, timings, job.orbit_budget)
        if timings is not None:
            report.timings = dict(timings)
    except InputError as e:
        logger.error(f"input error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        logger.error(f"cannot read input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OrbitBudgetError as e:
        logger.error(f"resource budget exceeded: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception:
        logger.exception("pipeline failed")
        raise

    if job.json_path:
        with open(job.json_path, "w", encoding="utf-8") as fh:
            fh.write(report.model_dump_json(indent=2))
    if job.dot_path:
        with open(job.dot_path, "w", encoding="utf-8") as fh:
            fh.write(write_dot(graph))
    if job.summary:
        out.write(summary_text(report))

    if report.verification is not None and not report.verification.ok:
        for v in report.verification.violations:
            logger.warning(f"violation: {v.kind}: {v.detail}")
        return 1
    return 0


# --- Batch mode ---

def random_hyperbolic(rng: np.random.Generator, dim: int, bound: int) -> IntMatrix:
    """Draw symmetric matrices with entries in [-bound, bound] until one has signature (dim-1, -1)."""
    if dim < 2 or bound < 1:
        raise InputError(f"no hyperbolic {dim}x{dim} matrix has entries bounded by {bound}")
    while True:
        M = rng.integers(-bound, bound + 1, size=(dim, dim))
        M = np.triu(M) + np.triu(M, 1).T
        A = [[int(a) for a in row] for row in M.tolist()]
        try:
            GramLattice.from_matrix(A)
        except InputError:
            continue
        return A


def _batch_job(index: int, seed: int, dim: int, bound: int) -> Dict[str, str]:
    rng = np.random.default_rng(seed)
    A = random_hyperbolic(rng, dim, bound)
    row = {key: "" for key in CSV_HEADER}
    row.update(index=str(index), seed=str(seed), matrix=json.dumps(A, separators=(",", ":")))
    try:
        L = LatticeInSpace.standard(A)
        row["det"] = str(L.determinant)
        W, chain = watson(L)
        row["watson_applied"] = str(bool(chain)).lower()
        row["watson_det"] = str(W.determinant)

        start = time.perf_counter()
        direct, _ = run_pipeline(A, "direct")
        row["seconds_direct"] = f"{time.perf_counter() - start:.3f}"
        row["classes_direct"] = str(len(direct.classes))
        row["generators_direct"] = str(len(direct.generators))

        if chain:
            start = time.perf_counter()
            via, _ = run_pipeline(A, "watson")
            row["seconds_watson"] = f"{time.perf_counter() - start:.3f}"
            row["classes_watson"] = str(len(via.classes))
        else:
            row["classes_watson"] = row["classes_direct"]
    except HyplatError as e:
        logger.error(f"batch job {index} failed on {A}: {e}")
    return row


async def batch_async(count: int, dim: int, bound: int, seed: Optional[int] = None,
                      workers: Optional[int] = None) -> str:
    if dim < 2:
        raise InputError(f"dimension must be at least 2, got {dim}")
    if bound < 1:
        raise InputError(f"entry bound must be at least 1, got {bound}")
    workers = workers or config.BATCH_WORKERS
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(count)] if count else []
    loop = asyncio.get_running_loop()
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else ThreadPoolExecutor(max_workers=1)
    with executor:
        rows = await asyncio.gather(*[loop.run_in_executor(executor, _batch_job, i, s, dim, bound)
                                      for i, s in enumerate(seeds)])
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    logger.info(f"batch of {count} rank {dim} matrices finished")
    return buffer.getvalue()


def batch(count: int, dim: int, bound: int, seed: Optional[int] = None, workers: Optional[int] = None) -> str:
    return asyncio.run(batch_async(count, dim, bound, seed, workers))
