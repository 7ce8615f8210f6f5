"""Shared fixtures for the orbital test suite."""

import numpy as np
import pytest

from orbital.residue_rings import DirichletCharacter, characters_of_order


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def cubic_character_mod_7() -> DirichletCharacter:
    return characters_of_order(7, 3)[0]


@pytest.fixture
def trivial_5() -> DirichletCharacter:
    return DirichletCharacter.trivial(5)
