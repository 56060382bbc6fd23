import itertools
import math

import pytest

from convchain.chain import ConvexChain, VertexMap, decode, encode, stats
from convchain.errors import DomainError
from convchain.exactcount import iter_vertex_maps
from convchain.lattice import Direction, enumerate_directions


def vm(*pairs):
    return VertexMap({Direction(a, b): m for (a, b), m in pairs})


def test_decode_examples():
    assert decode(vm(((1, 1), 2))).vertices == ((0, 0), (2, 2))
    assert decode(vm(((1, 0), 1), ((0, 1), 1))).vertices == ((0, 0), (1, 0), (1, 1))
    got = decode(vm(((1, 0), 1), ((1, 1), 1), ((0, 1), 1)))
    assert got.vertices == ((0, 0), (1, 0), (2, 1), (2, 2))


def test_empty_map_is_origin_chain():
    chain = decode(VertexMap({}))
    assert chain.vertices == ((0, 0),)
    assert encode(chain).entries == {}
    st = stats(VertexMap({}))
    assert st.endpoint == (0, 0) and st.vertex_count == 0 and st.euclidean_length == 0.0


def test_encode_examples():
    assert encode(ConvexChain(((0, 0), (2, 2)))).entries == {Direction(1, 1): 2}
    assert encode(ConvexChain(((0, 0), (1, 0), (1, 1)))).entries == {
        Direction(1, 0): 1,
        Direction(0, 1): 1,
    }


def test_encode_rejects_invalid():
    bad = [
        ((0, 0), (1, 1), (1, 0)),        # y decreases
        ((0, 0), (1, 1), (2, 2)),        # collinear duplicate direction
        ((0, 0), (1, 1), (2, 3), (3, 4)),  # slope decreases
        ((1, 1), (2, 2)),                # does not start at the origin
        ((0, 0), (0, 0)),                # zero side
    ]
    for vertices in bad:
        with pytest.raises(DomainError):
            encode(ConvexChain(vertices))


def test_stats_examples():
    st = stats(vm(((1, 1), 2)))
    assert st.endpoint == (2, 2) and st.vertex_count == 1
    assert st.euclidean_length == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    st = stats(vm(((1, 0), 1), ((0, 1), 1)))
    assert st.endpoint == (1, 1) and st.vertex_count == 2
    assert st.euclidean_length == pytest.approx(2.0, abs=1e-15)
    st = stats(vm(((1, 0), 1), ((1, 2), 1)))
    assert st.endpoint == (2, 2) and st.vertex_count == 2
    assert st.euclidean_length == pytest.approx(1 + math.sqrt(5), abs=1e-14)


def test_roundtrip_exhaustive_small_endpoints():
    # decode(encode) and encode(decode) over every chain with endpoint sum <= 8
    seen = 0
    for n1 in range(9):
        for n2 in range(9 - n1):
            for nu in iter_vertex_maps(n1, n2):
                chain = decode(nu)
                chain.validate()
                assert encode(chain).entries == nu.entries
                st = stats(nu)
                assert st.endpoint == (n1, n2)
                assert st.vertex_count == len(chain.vertices) - 1
                assert chain.endpoint == (n1, n2)
                seen += 1
    assert seen > 200


def test_roundtrip_support_in_small_directions():
    dirs = enumerate_directions(6)
    # all 1- and 2-direction supports with multiplicities up to 3
    for d in dirs:
        for m in (1, 2, 3):
            nu = VertexMap({d: m})
            assert encode(decode(nu)).entries == nu.entries
    for da, db in itertools.combinations(dirs, 2):
        for ma, mb in itertools.product((1, 3), repeat=2):
            nu = VertexMap({da: ma, db: mb})
            assert encode(decode(nu)).entries == nu.entries


def test_vertex_map_validation():
    with pytest.raises(DomainError):
        VertexMap({Direction(2, 4): 1})
    with pytest.raises(DomainError):
        VertexMap({Direction(1, 1): -2})
    # zero multiplicities are dropped, not stored
    assert vm(((1, 1), 0)).entries == {}


def test_serialization_roundtrips():
    nu = vm(((1, 0), 2), ((3, 2), 1))
    assert VertexMap.from_json(nu.to_json()).entries == nu.entries
    chain = decode(nu)
    assert ConvexChain.from_csv(chain.to_csv()) == chain
    assert chain.to_csv().splitlines()[0] == "0,0"
