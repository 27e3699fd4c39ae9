"""PENMAN parser/serializer contract tests."""

import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semfoil.graph import AmrGraph, GraphError, same_triples
from semfoil.penman import (
    PenmanError,
    dump_corpus,
    iter_corpus,
    parse_penman,
    serialize_penman,
    to_triples,
)

from graphgen import graph_corpus

FIGURE_TEXT = "(b / bite-01 :ARG0 (s / snake) :ARG1 (t / tiger))"


class TestParse:
    def test_basic_event_graph(self):
        g = parse_penman(FIGURE_TEXT)
        assert g.root == "b"
        assert g.instances == {("b", "bite-01"), ("s", "snake"), ("t", "tiger")}
        assert g.relations == {("b", ":ARG0", "s"), ("b", ":ARG1", "t")}
        assert g.attributes == frozenset()

    def test_minimal_graph(self):
        g = parse_penman("(a / and)")
        assert g.instances == {("a", "and")}
        assert g.relations == frozenset()
        assert g.root == "a"

    def test_inverse_role_normalized(self):
        g = parse_penman("(b / bite-01 :ARG1-of (s / see-01))")
        assert g.relations == {("s", ":ARG1", "b")}
        assert g.root == "b"

    def test_consist_of_not_normalized(self):
        g = parse_penman("(r / ring :consist-of (g / gold))")
        assert g.relations == {("r", ":consist-of", "g")}

    def test_double_inverse_of_consist_of(self):
        g = parse_penman("(g / gold :consist-of-of (r / ring))")
        assert g.relations == {("r", ":consist-of", "g")}

    def test_reentrancy_single_instance(self):
        g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")
        assert g.instances == {("w", "want-01"), ("b", "boy"), ("g", "go-02")}
        assert ("g", ":ARG0", "b") in g.relations
        assert ("w", ":ARG0", "b") in g.relations

    def test_attribute_constants(self):
        g = parse_penman('(c / city :name (n / name :op1 "New York") :quant 3 :polarity -)')
        assert ("n", ":op1", '"New York"') in g.attributes
        assert ("c", ":quant", "3") in g.attributes
        assert ("c", ":polarity", "-") in g.attributes

    def test_undeclared_bare_atom_is_constant(self):
        g = parse_penman("(s / sleep-01 :mode imperative)")
        assert ("s", ":mode", "imperative") in g.attributes

    def test_metadata_preserved_opaque(self):
        text = "# ::id 42\n# ::snt The snake bites.\n(b / bite-01)"
        g = parse_penman(text)
        assert g.metadata == ("# ::id 42", "# ::snt The snake bites.")
        assert g.instances == {("b", "bite-01")}

    def test_metadata_ignored_for_equality(self):
        plain = parse_penman("(b / bite-01)")
        tagged = parse_penman("# ::id 7\n(b / bite-01)")
        assert plain == tagged

    def test_strip_wiki(self):
        text = '(p / person :wiki "Barack_Obama" :name (n / name :op1 "Obama"))'
        assert any(a[1] == ":wiki" for a in parse_penman(text).attributes)
        stripped = parse_penman(text, strip_wiki=True)
        assert not any(a[1] == ":wiki" for a in stripped.attributes)

    def test_duplicate_edge_collapses(self):
        g = parse_penman("(a / alpha :mod (b / beta) :mod b)")
        assert g.relations == {("a", ":mod", "b")}


class TestParseErrors:
    @pytest.mark.parametrize(
        "text",
        [
            "(b / bite-01",
            "b / bite-01)",
            "(b bite-01)",
            "(b /)",
            "(b / bite-01 :ARG0)",
            "(b / bite-01 :ARG0 (s / snake）",
            "(b / bite-01) (c / cat)",
            "",
            "   ",
            '(b / bite-01 :name "unterminated)',
        ],
    )
    def test_malformed_raises_positioned_error(self, text):
        with pytest.raises(PenmanError) as info:
            parse_penman(text)
        assert info.value.line >= 1
        assert info.value.column >= 1

    def test_error_position_points_at_offender(self):
        with pytest.raises(PenmanError) as info:
            parse_penman("(b / bite-01\n  :ARG0 / )")
        assert info.value.line == 2

    def test_duplicate_concept(self):
        with pytest.raises(PenmanError, match="duplicate concept"):
            parse_penman("(b / bite-01 :ARG0 (b / boy))")

    def test_undeclared_variable_under_inverse_role(self):
        with pytest.raises(PenmanError, match="undeclared variable"):
            parse_penman("(b / bite-01 :ARG1-of s)")

    def test_constant_under_inverse_role(self):
        with pytest.raises(PenmanError, match="cannot take a constant"):
            parse_penman('(b / bite-01 :ARG1-of "snake")')


class TestSerialize:
    def test_round_trip_event_graph(self):
        g = parse_penman(FIGURE_TEXT)
        assert same_triples(parse_penman(serialize_penman(g)), g)

    def test_single_instance_exact(self):
        assert serialize_penman(parse_penman("(a / and)")) == "(a / and)"

    def test_deterministic_child_order(self):
        g = parse_penman("(b / bite-01 :ARG1 (t / tiger) :ARG0 (s / snake))")
        out = serialize_penman(g)
        assert out.index(":ARG0") < out.index(":ARG1")

    def test_reentrancy_single_introduction(self):
        g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")
        out = serialize_penman(g)
        assert out.count("/") == 3
        assert same_triples(parse_penman(out), g)

    def test_backward_edge_serialized_with_inversion(self):
        g = parse_penman("(b / bite-01 :ARG1-of (s / see-01))")
        out = serialize_penman(g)
        assert ":ARG1-of" in out
        assert same_triples(parse_penman(out), g)

    def test_cycle_serializes_without_inversion(self):
        g = AmrGraph.build(
            root="a",
            instances=[("a", "alpha"), ("b", "beta")],
            relations=[("a", ":mod", "b"), ("b", ":topic", "a")],
        )
        out = serialize_penman(g)
        assert same_triples(parse_penman(out), g)

    def test_metadata_round_trips(self):
        text = "# ::snt hello\n(h / hello-01)"
        out = serialize_penman(parse_penman(text))
        assert out.startswith("# ::snt hello\n")

    def test_unreachable_node_rejected(self):
        g = AmrGraph(
            root="a",
            instances=frozenset([("a", "alpha"), ("z", "zeta")]),
            relations=frozenset(),
            attributes=frozenset(),
        )
        with pytest.raises(GraphError, match="unreachable"):
            serialize_penman(g)


class TestTriples:
    def test_figure_graph_order(self):
        assert to_triples(parse_penman(FIGURE_TEXT)) == [
            ("b", ":instance", "bite-01"),
            ("s", ":instance", "snake"),
            ("t", ":instance", "tiger"),
            ("b", ":ARG0", "s"),
            ("b", ":ARG1", "t"),
        ]

    def test_single_instance(self):
        assert to_triples(parse_penman("(a / and)")) == [("a", ":instance", "and")]

    def test_polarity_constant_verbatim(self):
        g = parse_penman("(w / well-09 :polarity -)")
        assert ("w", ":polarity", "-") in to_triples(g)


class TestGraphType:
    def test_validate_rejects_undeclared_edge_endpoint(self):
        g = AmrGraph(
            root="a",
            instances=frozenset([("a", "alpha")]),
            relations=frozenset([("a", ":mod", "b")]),
            attributes=frozenset(),
        )
        with pytest.raises(GraphError, match="undeclared"):
            g.validate()

    def test_validate_rejects_duplicate_variable(self):
        g = AmrGraph(
            root="a",
            instances=frozenset([("a", "alpha"), ("a", "beta")]),
            relations=frozenset(),
            attributes=frozenset(),
        )
        with pytest.raises(GraphError, match="duplicate"):
            g.validate()

    def test_validate_rejects_missing_root(self):
        g = AmrGraph(
            root="q",
            instances=frozenset([("a", "alpha")]),
            relations=frozenset(),
            attributes=frozenset(),
        )
        with pytest.raises(GraphError, match="root"):
            g.validate()

    def test_without_variable_drops_incident_triples(self):
        g = parse_penman("(b / bite-01 :ARG0 (s / snake :quant 2))")
        out = g.without_variable("s")
        assert out.instances == {("b", "bite-01")}
        assert out.relations == frozenset()
        assert out.attributes == frozenset()

    def test_fresh_variable_suffixes_numeric_counter(self):
        g = parse_penman("(s / snake :mod (s2 / sly))")
        assert g.fresh_variable("snake") == "s3"
        assert g.fresh_variable("tiger") == "t"


class TestCorpusIO:
    def test_blank_line_separated_blocks(self):
        text = "# ::id 1\n(a / and)\n\n(b / bite-01 :ARG0 (s / snake))\n"
        graphs = list(iter_corpus(io.StringIO(text)))
        assert len(graphs) == 2
        assert graphs[0].metadata == ("# ::id 1",)
        assert graphs[1].root == "b"

    def test_dump_then_reload(self):
        graphs = [parse_penman(FIGURE_TEXT), parse_penman("(a / and)")]
        buf = io.StringIO()
        dump_corpus(graphs, buf)
        reloaded = list(iter_corpus(io.StringIO(buf.getvalue())))
        assert len(reloaded) == 2
        assert all(same_triples(x, y) for x, y in zip(graphs, reloaded))

    def test_corpus_error_names_block(self):
        with pytest.raises(PenmanError, match="corpus block"):
            list(iter_corpus(io.StringIO("(a / and)\n\n(b / broken")))


class TestProperties:
    def test_round_trip_on_random_corpus(self):
        for g in graph_corpus(seed=20260809, count=300):
            text = serialize_penman(g)
            assert same_triples(parse_penman(text), g), text

    def test_no_inverse_roles_survive_parsing(self):
        for g in graph_corpus(seed=11, count=200):
            reparsed = parse_penman(serialize_penman(g))
            for _, role, _ in reparsed.relations:
                assert not role.endswith("-of") or role == ":consist-of"

    def test_serialization_is_deterministic(self):
        for g in graph_corpus(seed=77, count=50):
            assert serialize_penman(g) == serialize_penman(g)

    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_paren_deletion_never_panics(self, data):
        rng = random.Random(data.draw(st.integers(0, 2**32 - 1)))
        g = graph_corpus(seed=rng.randrange(2**31), count=1, max_nodes=6)[0]
        text = serialize_penman(g)
        positions = [i for i, c in enumerate(text) if c in "()"]
        k = data.draw(st.integers(1, max(1, len(positions))))
        drop = set(rng.sample(positions, min(k, len(positions))))
        mangled = "".join(c for i, c in enumerate(text) if i not in drop)
        try:
            parse_penman(mangled)
        except PenmanError:
            pass
