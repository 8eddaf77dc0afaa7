import xml.etree.ElementTree as ET

from qubitio.channel import BlochVector
from qubitio.plotting import plot_region, region_svg, write_region_svg
from qubitio.sampler import SamplerConfig, achievable_region

SVG_NS = "{http://www.w3.org/2000/svg}"


def _result(count=50):
    return achievable_region(SamplerConfig(seed=2, count=count), BlochVector(0.5, 0, 0.5))


def test_svg_is_well_formed_scatter(tmp_path):
    res = _result()
    path = tmp_path / "r.svg"
    write_region_svg(res, path)
    root = ET.parse(path).getroot()
    assert root.tag == f"{SVG_NS}svg" and root.get("version") == "1.1"
    circles = list(root.iter(f"{SVG_NS}circle"))
    dots = [c for c in circles if c.get("r") == "1"]
    assert len(dots) == 50
    assert any(c.get("fill") == "blue" for c in circles)
    assert "script" not in path.read_text()


def test_svg_maps_axes_onto_canvas():
    res = _result(200)
    root = ET.fromstring(region_svg(res))
    for c in root.iter(f"{SVG_NS}circle"):
        if c.get("r") == "1":
            assert 40 <= float(c.get("cx")) <= 560
            assert 40 <= float(c.get("cy")) <= 560


def test_matplotlib_figure(tmp_path):
    path = tmp_path / "r.png"
    plot_region(_result(), path, title="cloud")
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
