#!/usr/bin/env python3
"""
Example usage of the viewrewrite package.

Walks through the a⁵ query over the views a³ and a⁴: the views determine the
query, yet not in a monotone way, so certain answers are not a rewriting.
The second half shows a monotonically determined example where they are.
"""

from viewrewrite import apply_view, build_template, cert, cert_all, check_monotone_words, rpq_eval
from viewrewrite.fixtures import A5, BRANCH, a5_path_db, a5_decoy_db, branch_db, reference_rewriting
from viewrewrite.graphs import serialize_graph
from viewrewrite.template import materialize_counterexample


def show_pairs(title, pairs):
    print(f"{title}: {', '.join(f'({x},{y})' for x, y in pairs) or 'none'}")


def main():
    print("=" * 80)
    print("Q = a⁵ over V1 = a³, V2 = a⁴")
    print("=" * 80)
    print()

    q, v = A5.query_spec, A5.view_spec
    d, d_prime = a5_path_db(), a5_decoy_db()
    s = apply_view(d, v)

    show_pairs("Q(D)", rpq_eval(d, q))
    show_pairs("Q(D')", rpq_eval(d_prime, q))
    show_pairs("FO rewriting on V(D)", reference_rewriting(A5, s))
    print(f"V(D) ⊆ V(D'): {s.is_subinstance_of(apply_view(d_prime, v))}")
    print()

    t = build_template(q, v)
    print(f"Template: {t.size} nodes, {len(t.graph.edges)} edges")
    verdict = cert(s, "x0", "x5", t)
    print(f"(x0,x5) certain on V(D): {verdict.certain}")
    if not verdict.certain:
        counter = materialize_counterexample(s, verdict.witness, t, q, v, pair=("x0", "x5"))
        print(f"Counterexample database ({len(counter.nodes)} nodes):")
        print(serialize_graph(counter))

    result = check_monotone_words(q, v, t, max_len=8)
    print("Monotone determinacy check:")
    print(result.to_text())

    print("=" * 80)
    print("Q = ab*a | ac*a over V1 = ab*, V2 = ac*, V3 = b*a | c*a")
    print("=" * 80)
    print()

    q2, v2 = BRANCH.query_spec, BRANCH.view_spec
    s2 = apply_view(branch_db(), v2)
    t2 = build_template(q2, v2)
    show_pairs("Q(D)", rpq_eval(branch_db(), q2))
    show_pairs("certain answers on V(D)", cert_all(s2, t2))
    show_pairs("conjunctive rewriting on V(D)", reference_rewriting(BRANCH, s2))
    print()
    print(check_monotone_words(q2, v2, t2, max_len=6).to_text())


if __name__ == "__main__":
    main()
