import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapjulia._accel import HAVE_NUMBA, use_backend
from lyapjulia.errors import ValidationError
from lyapjulia.polynomial import PolynomialSpec
from lyapjulia.render import RasterImage, Viewport, gray_levels, pixel_coordinate, render_julia, write_image

Q2, Q3 = PolynomialSpec.monomial(2), PolynomialSpec.monomial(3)


def test_viewport_validation_and_pixel_centres():
    with pytest.raises(ValidationError):
        Viewport(0j, 1.0, 8, 64)
    with pytest.raises(ValidationError):
        Viewport(0j, 0.0)
    vp = Viewport(1 + 1j, 2.0, 16, 32)
    assert pixel_coordinate(vp, 0, 0) == pytest.approx(complex(1 - 2 + 2 / 16, 1 + 4 - 4 / 32))
    g = vp.grid()
    assert g.shape == (32, 16)
    assert np.mean(g) == pytest.approx(1 + 1j)


def test_monomial_d2_examples(backend):
    vp = Viewport(0j, 2.0, 64, 64)
    img = render_julia(Q2, vp, 50)
    g = vp.grid()
    assert np.all(img.counts[np.abs(g) < 0.5] == 0)
    corner = img.counts[0, -1]
    assert 1 <= corner <= 5
    assert np.all(img.counts[[0, 0, -1, -1], [0, -1, 0, -1]] > 0)


def test_monomial_d3_disk(backend):
    vp = Viewport(0j, 1.5, 96, 96)
    img = render_julia(Q3, vp, 60)
    r = np.abs(vp.grid())
    assert np.all(img.counts[r <= 0.9] == 0)
    assert np.all(img.counts[r >= 1.1] > 0)


def test_filled_set_inside_escape_bound(backend):
    vp = Viewport(0j, 1.5, 96, 96)
    img = render_julia(PolynomialSpec(2, (0.1,)), vp, 200)
    r = np.abs(vp.grid())
    assert np.all(img.counts[r > 1.1] > 0)
    assert np.all(img.counts[r < 0.3] == 0)


def test_header_and_bytes(tmp_path):
    img = RasterImage(np.zeros((16, 16), dtype=np.int64), 10)
    path = tmp_path / "a.ppm"
    write_image(img, path)
    data = path.read_bytes()
    header = b"P6\n16 16\n255\n"
    assert len(header) == 13
    assert data == header + bytes(768)


def test_render_twice_identical(tmp_path):
    vp = Viewport(0.1 - 0.2j, 1.3, 40, 24)
    spec = PolynomialSpec(3, (0.1, 0.2j))
    for name in ("a", "b"):
        write_image(render_julia(spec, vp, 80), tmp_path / f"{name}.ppm")
    assert (tmp_path / "a.ppm").read_bytes() == (tmp_path / "b.ppm").read_bytes()


def test_gray_ramp():
    assert gray_levels(np.array([0, 1, 2, 33, 500])).tolist() == [0, 255, 247, 1, 1]


@settings(max_examples=25, deadline=None)
@given(extra=st.integers(1, 50))
def test_more_iterations_only_resolve_pixels(extra):
    vp = Viewport(0j, 1.5, 16, 16)
    spec = PolynomialSpec(2, (0.2 - 0.1j,))
    a = render_julia(spec, vp, 20).counts
    b = render_julia(spec, vp, 20 + extra).counts
    assert np.array_equal(a[a > 0], b[a > 0])
    assert np.all((b == 0) <= (a == 0))


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba missing")
def test_backends_equal():
    vp = Viewport(0j, 1.6, 50, 40)
    spec = PolynomialSpec(4, (0.1, -0.1j, 0.05))
    with use_backend("numba"):
        a = render_julia(spec, vp, 100).counts
    with use_backend("numpy"):
        b = render_julia(spec, vp, 100).counts
    assert np.array_equal(a, b)
