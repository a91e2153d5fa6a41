import pytest

from lacy.datagen import default_catalog, gen_dataset
from lacy.scene import Point2, Scene, SceneObject


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def small_dataset(catalog):
    return gen_dataset(catalog, 60, seed=101)


@pytest.fixture()
def two_object_scene():
    return Scene(
        "s-two",
        (
            SceneObject("mug", Point2(0.2, 0.2)),
            SceneObject("plate", Point2(0.8, 0.8)),
        ),
    )
