"""
Tests for the hexagonal layout, device placement and propagation terms.
"""
import math

import numpy as np
import pytest

from src.errors import ConfigurationError, DomainError
from src.link import Technology
from src.network import (
    build_layout,
    directivity_attenuation_db,
    in_hexagon,
    min_image_distance,
    path_loss_db,
    place_devices,
)


class TestBuildLayout:
    """Test suite for site grids and wraparound translations."""

    def test_single_site(self):
        """Test degenerate one-site layout."""
        layout = build_layout(1, 500, False)

        np.testing.assert_array_equal(layout.sites, np.zeros((1, 2)))
        assert layout.translations.shape == (0, 2)

    def test_seven_sites_with_wraparound(self):
        """Test center plus ring at ISD and translations of length ISD*sqrt(7)."""
        layout = build_layout(7, 500, True)

        assert layout.sites.shape == (7, 2)
        np.testing.assert_allclose(layout.sites[0], [0.0, 0.0])
        np.testing.assert_allclose(np.linalg.norm(layout.sites[1:], axis=1), 500.0)
        assert layout.translations.shape == (6, 2)
        np.testing.assert_allclose(np.linalg.norm(layout.translations, axis=1), 500.0 * math.sqrt(7))

    def test_seven_sites_without_wraparound(self):
        """Test wraparound off keeps sites and drops translations."""
        layout = build_layout(7, 500, False)

        assert layout.sites.shape == (7, 2)
        assert layout.translations.shape == (0, 2)

    def test_three_site_cluster(self):
        """Test the three-site cluster tiles with translations of length ISD*sqrt(3)."""
        layout = build_layout(3, 500, True)

        np.testing.assert_allclose(np.linalg.norm(layout.translations, axis=1), 500.0 * math.sqrt(3))
        for a in range(3):
            for b in range(a + 1, 3):
                assert np.linalg.norm(layout.sites[a] - layout.sites[b]) == pytest.approx(500.0)

    @pytest.mark.parametrize("num_sites,isd", [(4, 500), (19, 500), (7, 0), (7, -10)])
    def test_invalid_layouts(self, num_sites, isd):
        """Test unsupported site counts and bad ISD raise configuration errors."""
        with pytest.raises(ConfigurationError):
            build_layout(num_sites, isd, True)

    @pytest.mark.parametrize("num_sites", [3, 7])
    def test_min_image_translation_invariance(self, num_sites):
        """Test translating every device by a lattice vector keeps all min-image distances."""
        layout = build_layout(num_sites, 500, True)
        placements = place_devices(layout, 4, "5g-nr", rng_seed=11)
        points = np.array([p.position for p in placements])

        def distances(pts):
            to_sites = [min_image_distance(layout, p, s) for p in pts for s in layout.sites]
            pairwise = [min_image_distance(layout, p, q) for p in pts for q in pts]
            return np.sort(to_sites), np.sort(pairwise)

        base_sites, base_pairs = distances(points)
        for shift in layout.translations:
            sites, pairs = distances(points + shift)
            np.testing.assert_allclose(sites, base_sites, atol=1e-6)
            np.testing.assert_allclose(pairs, base_pairs, atol=1e-6)

    def test_min_image_distance_bounded(self):
        """Test wraparound distances never exceed the cluster's Voronoi radius."""
        layout = build_layout(7, 500, True)
        placements = place_devices(layout, 12, "5g-nr", rng_seed=2)
        bound = 500.0 * math.sqrt(7) / math.sqrt(3)

        for p in placements:
            for site in layout.sites:
                assert min_image_distance(layout, p.position, site) <= bound + 1e-9


class TestPlaceDevices:
    """Test suite for uniform device placement."""

    def test_full_layout(self):
        """Test 12 devices per cell in a 7-cell layout gives 84 placements."""
        layout = build_layout(7, 500, True)
        placements = place_devices(layout, 12, Technology.NR, rng_seed=1)

        assert len(placements) == 84
        assert np.bincount([p.cell_id for p in placements]).tolist() == [12] * 7
        assert [p.device_id for p in placements] == list(range(84))
        for p in placements:
            assert in_hexagon(layout, p.position, p.cell_id)
            assert np.linalg.norm(np.array(p.position) - layout.sites[p.cell_id]) >= 35.0
            assert p.tech is Technology.NR
            assert p.sector in (0, 1, 2)

    def test_minimal_instance(self):
        """Test a single NB-IoT device in a single cell."""
        layout = build_layout(1, 500, False)
        placements = place_devices(layout, 1, "nb-iot", rng_seed=7)

        assert len(placements) == 1
        assert np.linalg.norm(placements[0].position) >= 35.0

    def test_deterministic(self):
        """Test the same seed gives identical placements."""
        layout = build_layout(7, 500, True)

        assert place_devices(layout, 5, "lte-m", rng_seed=3) == place_devices(layout, 5, "lte-m", rng_seed=3)

    def test_mixed_technologies_cycle(self):
        """Test mixed runs cycle technologies within each cell."""
        layout = build_layout(3, 500, True)
        placements = place_devices(layout, 3, "5g-nr", rng_seed=4, mixed_tech=True)

        cell_0 = [p.tech for p in placements if p.cell_id == 0]
        assert cell_0 == [Technology.NB_IOT, Technology.LTE_M, Technology.NR]

    def test_zero_devices_rejected(self):
        """Test per_cell < 1 raises a configuration error."""
        with pytest.raises(ConfigurationError):
            place_devices(build_layout(1, 500, False), 0, "nb-iot", rng_seed=0)


class TestPropagation:
    """Test suite for path loss and sector directivity."""

    @pytest.mark.parametrize("distance,expected", [(1000.0, 128.1), (500.0, 116.78), (35.0, 73.36)])
    def test_path_loss(self, distance, expected):
        """Test path loss against direct evaluation."""
        assert path_loss_db(distance) == pytest.approx(expected, abs=0.01)

    def test_path_loss_monotone(self):
        """Test path loss increases with distance."""
        losses = path_loss_db(np.linspace(35.0, 3000.0, 200))

        assert np.all(np.diff(losses) > 0)

    def test_path_loss_domain(self):
        """Test distances below 35 m are rejected."""
        with pytest.raises(DomainError):
            path_loss_db(34.9)

    @pytest.mark.parametrize("angle,expected", [(0.0, 0.0), (65.0, 12.0), (-65.0, 12.0), (180.0, 20.0), (360.0, 0.0)])
    def test_directivity(self, angle, expected):
        """Test sector pattern values and the 20 dB cap."""
        assert directivity_attenuation_db(angle) == pytest.approx(expected)
