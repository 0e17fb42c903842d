import math

import pytest

from cyclekit.contfrac import ContinuedFraction, chain
from cyclekit.cycle import Cycle, Metric
from cyclekit.figure import (INFINITY, REAL_LINE, Figure, only_reals,
                             orthogonal, tangent)
from cyclekit.numerics import to_float
from cyclekit.render import (PALETTE, Viewport, circles_from_svg,
                             polyline_points_from_svg, render_chain,
                             render_cycle, render_figure, svg_document)

E2 = Metric.named("e")
P2 = Metric.named("p")
H2 = Metric.named("h")

VP = Viewport()


def tangent_lines_figure():
    fig = Figure()
    fig.add_cycle((1, 0, 0, -1), "a")
    fig.add_cycle_rel([tangent("a"), orthogonal(INFINITY), only_reals()],
                      "l", pins=[orthogonal(REAL_LINE)])
    return fig


class TestViewport:
    def test_round_trip_px(self):
        u, v = 1.25, -3.5
        assert VP.from_px(*VP.to_px(u, v)) == pytest.approx((u, v))

    def test_extents_must_be_positive(self):
        with pytest.raises(ValueError):
            Viewport(umin=1, umax=-1)
        with pytest.raises(ValueError):
            Viewport(width=0)

    def test_v_axis_points_up(self):
        x_lo, y_lo = VP.to_px(0, VP.vmin)
        x_hi, y_hi = VP.to_px(0, VP.vmax)
        assert y_lo > y_hi


class TestRenderCycle:
    def test_circle_element_round_trips(self):
        c = Cycle.from_row(E2, (2, 1, -3, -5))
        [(u, v, r)] = circles_from_svg(render_cycle(c, VP), VP)
        cu, cv = (to_float(x) for x in c.center())
        assert abs(u - cu) < 1e-6 and abs(v - cv) < 1e-6
        assert abs(r * r - to_float(c.radius_sq())) < 1e-6

    def test_zero_radius_becomes_a_dot(self):
        c = Cycle.zero_radius_at(E2, (1, 2))
        svg = render_cycle(c, VP)
        assert 'class="dot"' in svg
        assert circles_from_svg(svg, VP) == []

    def test_imaginary_circle_is_dashed_and_flagged(self):
        c = Cycle.from_row(E2, (1, 0, 0, 4))   # radius^2 = -4
        svg = render_cycle(c, VP)
        assert 'imaginary' in svg and 'stroke-dasharray' in svg

    def test_line_is_clipped_to_the_viewport(self):
        c = Cycle.from_row(E2, (0, 1, 1, 2))
        svg = render_cycle(c, VP)
        assert svg.startswith('<line')
        for val in (float(x) for x in
                    __import__('re').findall(r'[xy][12]="([-0-9.]+)"', svg)):
            assert -1 <= val <= VP.width + 1

    def test_zero_row_refused(self):
        with pytest.raises(ValueError):
            render_cycle(Cycle(E2, 0, (0, 0), 0), VP)

    def test_infinity_row_draws_nothing(self):
        svg = render_cycle(Cycle.infinity(E2), VP)
        assert 'empty' in svg

    def test_parabola_samples_satisfy_the_equation(self):
        c = Cycle.from_row(P2, (1, 0, 1, 0))   # u^2 = 2v
        doc = svg_document([render_cycle(c, VP)], VP)
        [pts] = polyline_points_from_svg(doc, VP)
        assert len(pts) == VP.samples
        assert all(abs(to_float(c.value_at(p))) < 1e-6 for p in pts)
        # spot shape: vertex at origin, symmetric arms
        assert min(v for _, v in pts) >= -1e-6

    def test_parabola_through_expected_points(self):
        c = Cycle.from_row(P2, (1, 0, 1, 0))
        for u, v in ((0, 0), (1, 0.5), (-1, 0.5)):
            assert abs(to_float(c.value_at((u, v)))) == 0

    def test_hyperbola_branches_satisfy_the_equation(self):
        for row in ((1, 0, 0, -1), (1, 0, 0, 1), (1, 2, 1, 1)):
            c = Cycle.from_row(H2, row)
            doc = svg_document([render_cycle(c, VP)], VP)
            branches = polyline_points_from_svg(doc, VP)
            assert len(branches) == 2
            assert all(abs(to_float(c.value_at(p))) < 1e-6
                       for b in branches for p in b)

    def test_degenerate_hyperbola_draws_its_asymptote_pair(self):
        c = Cycle.from_row(H2, (1, 0, 0, 0))   # u^2 = v^2
        svg = render_cycle(c, VP)
        assert svg.count('<line') == 2

    def test_flat_cycles_ignore_the_metric_flavour(self):
        for metric in (E2, P2, H2):
            svg = render_cycle(Cycle.from_row(metric, (0, 0, 1, -2)), VP)
            assert svg.startswith('<line')


class TestRenderFigure:
    def test_byte_stable(self):
        fig = tangent_lines_figure()
        assert render_figure(fig) == render_figure(fig)

    def test_nodes_carry_generation_styling(self):
        svg = render_figure(tangent_lines_figure())
        assert 'data-generation="0"' in svg
        assert 'data-generation="1"' in svg
        assert PALETTE[0] in svg and PALETTE[1] in svg

    def test_empty_figure_is_axes_only(self):
        svg = render_figure(Figure())
        assert '<g class="axes">' in svg
        assert 'class="cycle"' not in svg.replace('cycle empty', '')

    def test_parametric_nodes_go_to_the_warning_layer(self):
        fig = Figure()
        fig.add_cycle((1, 0, 0, -1), "a")
        fig.add_cycle_rel([tangent("a")], "t")
        svg = render_figure(fig)
        assert 'class="warnings"' in svg
        assert 't: parametric' in svg

    def test_labels_are_optional(self):
        fig = tangent_lines_figure()
        assert '<text class="label"' not in render_figure(fig)
        assert '>a</text>' in render_figure(fig, labels=True)

    def test_ninepoint_figure_renders(self):
        from cyclekit.figure import nine_point_figure
        r = nine_point_figure((0, 0), (4, 0), (1, 3))
        svg = render_figure(r.figure)
        assert svg.count('class="dot"') >= 10   # nine points + orthocenter
        assert render_figure(r.figure) == svg


class TestRenderChain:
    def test_chain_document(self):
        cf = ContinuedFraction.parse("2;1,2,1,1,4")
        ch = chain(cf, 4, "tangent")
        svg = render_chain(ch)
        assert 'data-label="boundary"' in svg
        assert 'data-label="horocycles"' in svg
        assert 'data-label="connecting"' in svg
        assert svg == render_chain(ch)

    def test_mirrors_are_dashed(self):
        cf = ContinuedFraction.parse("2;1,2")
        ch = chain(cf, 1, "orthogonal")
        svg = render_chain(ch)
        assert 'data-label="mirrors"' in svg
        assert 'stroke-dasharray' in svg
        assert 'stroke-dasharray' not in render_chain(ch, mirrors=False)

    def test_horocycles_shrink_along_the_chain(self):
        cf = ContinuedFraction.parse("3;7,15,1")
        ch = chain(cf, 3, "tangent")
        vp = Viewport(-0.5, 4.0, -1.5, 2.0)
        svg = render_chain(ch, vp)
        # boundary-touching circles come back through the parser
        radii = [r for _, _, r in circles_from_svg(svg, vp)]
        horo = radii[:len(ch.horocycles)]
        assert horo == sorted(horo, reverse=True)


class TestDocument:
    def test_header_and_size(self):
        doc = svg_document([], VP)
        assert doc.startswith('<svg xmlns="http://www.w3.org/2000/svg"')
        assert 'version="1.1"' in doc
        assert f'width="{VP.width}"' in doc

    def test_axes_only_when_origin_visible(self):
        off = Viewport(umin=10, umax=20, vmin=10, vmax=20)
        doc = svg_document([], off)
        assert doc.count('<line') == 0
        assert svg_document([], VP).count('<line') == 2
