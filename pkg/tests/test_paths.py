import numpy as np
import pytest

from nvholonomy.paths import (
    PathError,
    SpherePath,
    circle,
    concat,
    latitude,
    load_path,
    longitude,
    parametric,
    parse_angle,
    path_from_dict,
    square,
)


def test_builtins():
    assert circle().is_loop()
    sq = square()
    assert sq.is_loop()
    assert len(sq.segments) == 4
    assert np.allclose(sq.start(), (np.pi / 3, 0.0))
    # corners of the square in (theta, phi)
    corners = [seg.start() for seg in sq.segments]
    expect = [(np.pi / 3, 0), (np.pi / 3, np.pi / 3), (2 * np.pi / 3, np.pi / 3), (2 * np.pi / 3, 0)]
    assert np.allclose(corners, expect)


def test_discontinuous_path_rejected():
    with pytest.raises(PathError):
        SpherePath((latitude(1.0, 0, 1), latitude(1.0, 1.1, 2)))


def test_theta_range_enforced():
    with pytest.raises(PathError):
        SpherePath((longitude(0.0, 3.0, 3.3),))


def test_open_path_is_not_loop():
    assert not SpherePath((latitude(1.0, 0, 1),)).is_loop()


def test_reverse_and_concat():
    p = SpherePath((longitude(0.3, 0.5, 1.0),), label="a")
    q = SpherePath((latitude(1.0, 0.3, 1.5),), label="b")
    pq = concat(p, q)
    assert len(pq.segments) == 2
    r = pq.reversed()
    assert np.allclose(r.start(), pq.end()) and np.allclose(r.end(), pq.start())
    s = np.linspace(0, 1, 7)
    assert np.allclose(r.segments[0].dphi(s), -q.segments[0].dphi(s))


def test_segment_derivatives_match_finite_differences():
    seg = parametric([[1.0, 0.0], [1.2, 0.5], [0.9, 1.3], [1.0, 2.0]])
    s = np.linspace(0.05, 0.95, 9)
    h = 1e-6
    fd = (seg.theta(s + h) - seg.theta(s - h)) / (2 * h)
    assert np.allclose(seg.dtheta(s), fd, atol=1e-7)
    assert np.allclose(seg.start(), (1.0, 0.0)) and np.allclose(seg.end(), (1.0, 2.0))


@pytest.mark.parametrize("text,value", [
    ("pi/3", np.pi / 3), ("2*pi/3", 2 * np.pi / 3), ("-pi", -np.pi), (0.25, 0.25),
    ("sqrt(2)*pi", np.sqrt(2) * np.pi), (3, 3.0),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("bad", ["__import__('os')", "pi.real", "x", True, [1]])
def test_parse_angle_rejects(bad):
    with pytest.raises(PathError):
        parse_angle(bad)


def test_yaml_file_round_trip(tmp_path):
    f = tmp_path / "square.yaml"
    f.write_text(
        "label: sq\n"
        "segments:\n"
        "  - latitude: {theta: pi/3, phi_start: 0, phi_end: pi/3}\n"
        "  - longitude: {phi: pi/3, theta_start: pi/3, theta_end: 2*pi/3}\n"
        "  - latitude: {theta: 2*pi/3, phi_start: pi/3, phi_end: 0}\n"
        "  - longitude: {phi: 0, theta_start: 2*pi/3, theta_end: pi/3}\n"
    )
    p = load_path(f)
    ref = square()
    s = np.linspace(0, 1, 11)
    for a, b in zip(p.segments, ref.segments):
        assert np.allclose(a.at(s), b.at(s), atol=1e-15)
    assert p.label == "sq" and p.is_loop()


def test_degree_units():
    p = path_from_dict({"units": "deg", "segments": [{"latitude": {"theta": 60, "phi_start": 0, "phi_end": 360}}]})
    assert p.is_loop()
    assert p.start()[0] == pytest.approx(np.pi / 3)


def test_parametric_from_dict():
    p = path_from_dict({"segments": [{"parametric": {"points": [[1, 0], ["pi/3", 1], [1, 2]]}}]})
    assert p.segments[0].theta(0.5) == pytest.approx(np.pi / 3)


@pytest.mark.parametrize("doc", [
    {},
    {"segments": [{"latitude": {"theta": 1}}]},
    {"segments": [{"spiral": {}}]},
    {"segments": [{"latitude": {"theta": 1, "phi_start": 0, "phi_end": 1}, "longitude": {}}]},
    {"segments": [], "colour": "red"},
    {"units": "grad", "segments": []},
])
def test_malformed_documents(doc):
    with pytest.raises(PathError):
        path_from_dict(doc)


def test_load_builtin_by_name():
    assert load_path("circle").label == "circle"
