"""Runs the worked examples end to end and prints what they produce.

Run by hand from the repository root: python verification/verify_examples.py
"""
import sys
import time

sys.path.insert(0, ".")

from hyplat.cli import graph_to_gram, run_pipeline
from hyplat.cone import make_frame
from hyplat.models import decode_matrix
from hyplat.voronoi import GeneratorSet, verify, traverse
from hyplat.watson import groups_agree


def check(name, A, expected_classes, expected_connecting=None):
    print(f"{name}: traversing...")
    start = time.perf_counter()
    f = make_frame(A)
    graph, gens = traverse(f)
    elapsed = time.perf_counter() - start
    report = verify(f, graph, gens)
    matched = expected_classes is None or len(graph.points) == expected_classes
    matched = matched and (expected_connecting is None or len(graph.connecting_elements) == expected_connecting)
    status = "OK" if matched and report.ok else "MISMATCH"
    print(f"  {len(graph.points)} classes (expected {expected_classes}), "
          f"{len(graph.connecting_elements)} connecting elements, "
          f"{len(report.violations)} violations, {elapsed:.1f}s  [{status}]")
    for p, stab in zip(graph.points, graph.stabilizers):
        print(f"    x{p.id} = {tuple(p.vector)}  neighbours={p.num_non_blind(f)}  |Stab|={stab.order}")
    return f, gens


def check_watson(name, A, expected_classes, expected_watson_classes=None):
    f, direct = check(name, A, expected_classes)
    start = time.perf_counter()
    report, _ = run_pipeline(A, "watson")
    elapsed = time.perf_counter() - start
    w = report.watson
    print(f"  chain {w.chain}, det {' -> '.join(w.determinants)}, {len(report.classes)} classes "
          f"(expected {expected_watson_classes}), {elapsed:.1f}s")
    recovered = GeneratorSet(generators=[decode_matrix(g) for g in report.generators])
    agree = groups_agree(f, direct, recovered)
    print(f"  orbit of L under Aut(W): {w.orbit_size}; groups agree: {agree}")


if __name__ == "__main__":
    check("3x3 det -155", [[-1, -3, -1], [-3, 14, 8], [-1, 8, 11]], 9, 16)
    check("H4", [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], 1)
    check("K4", graph_to_gram([(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], 4), 1)
    check_watson("4x4 det -32", [[17, -17, 20, -9], [-17, -25, 15, -6], [20, 15, 4, -2], [-9, -6, -2, 1]], 19, 3)
    check_watson("diag(-1,1,4)", [[-1, 0, 0], [0, 1, 0], [0, 0, 4]], None)
    print("Done.")
