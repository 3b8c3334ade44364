import numpy as np
import pytest
from hypothesis import strategies as st

from nedseg.algebra import GrayImage, new_image

EX1_A = [8, 3, 2, 9, 15, 1, 4, 7, 2]
EX1_B = [8, 1, 5, 3, 12, 2, 6, 4, 1]


@pytest.fixture
def ex1_a():
    return new_image(3, 3, 256, EX1_A)


@pytest.fixture
def ex1_b():
    return new_image(3, 3, 256, EX1_B)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_image(rng, height=None, width=None, levels=256, max_side=64):
    height = height or int(rng.integers(1, max_side + 1))
    width = width or int(rng.integers(1, max_side + 1))
    return GrayImage(rng.integers(0, levels, size=(height, width)), levels)


@st.composite
def images(draw, max_side=12, levels=None, shape=None):
    levels = levels or draw(st.sampled_from([2, 4, 16, 256]))
    if shape is None:
        shape = (draw(st.integers(1, max_side)), draw(st.integers(1, max_side)))
    flat = draw(st.lists(st.integers(0, levels - 1), min_size=shape[0] * shape[1],
                         max_size=shape[0] * shape[1]))
    return GrayImage(np.array(flat).reshape(shape), levels)


@st.composite
def image_pairs(draw, max_side=12):
    a = draw(images(max_side=max_side))
    b = draw(images(levels=a.levels, shape=a.shape))
    return a, b
