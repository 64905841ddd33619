"""Smoke test for the rfdgraph_py extension: parses a presentation, runs
every exposed operation, and cross-checks a few basics. Exits nonzero on
the first surprise."""

import json

import rfdgraph_py

CYCLE_WITH_EXIT = """
vertex u
vertex v
vertex w
edge c1: u -> v
edge c2: v -> u
edge d: v -> w
"""

SINGLE_LOOP = """
vertex v
edge e: v -> v
"""


def main():
    g = rfdgraph_py.Presentation.parse(CYCLE_WITH_EXIT)
    assert g.vertices() == ["u", "v", "w"], g.vertices()
    assert g.arcs() == ["c1", "c2", "d"], g.arcs()
    assert g.primitives() == [], g.primitives()
    assert g.out_degree("v") == "2", g.out_degree("v")
    assert g.in_degree("w") == "1", g.in_degree("w")

    # A cycle with an exit is never residually finite-dimensional.
    assert not g.is_rfd()
    check = json.loads(g.check_json())
    assert check["kind"] == "conditions"
    assert check["rfd"] is False
    assert check["conditions"]["b"]["holds"] is False
    witness = check["conditions"]["b"]["witness"]
    assert witness["type"] == "cycle_with_exit", witness

    # The groupoid model agrees: periodic points are not dense.
    density = json.loads(g.density_json())
    assert density["kind"] == "density"
    assert density["dense"] is False
    assert not g.is_dense()

    # Round trip through the canonical text form.
    again = rfdgraph_py.Presentation.parse(g.serialize())
    assert again.serialize() == g.serialize()

    loop = rfdgraph_py.Presentation.parse(SINGLE_LOOP)
    assert loop.is_rfd()
    assert loop.is_dense()

    # The loop's periodic point is a fixed point of the shift: orbit size 1,
    # isotropy the winding number group.
    orbit = json.loads(loop.orbit_json("e^inf"))
    assert orbit["kind"] == "orbit"
    assert orbit["finite"] is True
    assert orbit["orbit"] == {"type": "finite", "members": ["(e)^inf"]}, orbit
    iso = json.loads(loop.isotropy_json("e^inf"))
    assert iso["kind"] == "isotropy"
    assert iso["isotropy"] == {"type": "infinite_cyclic", "period": 1}, iso
    assert iso["generator"]["k"] == 1, iso

    expansion = json.loads(loop.expand_json(4))
    assert expansion["kind"] == "expansion"
    assert expansion["vertices"] == ["v"]
    assert [e["edge"] for e in expansion["edges"]] == ["e"]

    validation = json.loads(loop.validate_json())
    assert validation["kind"] == "validation"
    assert validation["valid"] is True

    dot = loop.dot()
    assert dot.startswith("digraph") and '"v"' in dot

    # Pinned generator: the same seed always yields the same presentation,
    # and its reports agree with the native verdict.
    text = rfdgraph_py.random_presentation_text(7)
    assert text == rfdgraph_py.random_presentation_text(7)
    r = rfdgraph_py.Presentation.parse(text)
    assert json.loads(r.check_json())["rfd"] == r.is_rfd()

    # Errors surface as ValueError.
    try:
        rfdgraph_py.Presentation.parse("vertex v\nedge e: v -> nowhere")
    except ValueError:
        pass
    else:
        raise AssertionError("bad presentation parsed")
    try:
        loop.orbit_json("not a point")
    except ValueError:
        pass
    else:
        raise AssertionError("bad point accepted")

    print("smoke: all assertions passed")


if __name__ == "__main__":
    main()
