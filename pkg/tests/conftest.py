import os

import pytest

from warnsift.cfg import build_cfg
from warnsift.corpusio import WarningReport
from warnsift.cparser import locate_ip, parse_source

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

PAIR_SOURCE_NAME = "null_deref_pair.c"


@pytest.fixture(scope="session")
def pair_source():
    with open(os.path.join(FIXTURES, PAIR_SOURCE_NAME), "r", encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def pair_tree(pair_source):
    return parse_source(pair_source, PAIR_SOURCE_NAME)


@pytest.fixture(scope="session")
def bad_warning():
    return WarningReport(PAIR_SOURCE_NAME, "bad", 4, "twoInts", 1, "w1")


@pytest.fixture(scope="session")
def good_warning():
    return WarningReport(PAIR_SOURCE_NAME, "good", 10, "twoInts", 0, "w2")


@pytest.fixture(scope="session")
def bad_cfg(pair_tree):
    return build_cfg(pair_tree.function_named("bad"))


@pytest.fixture(scope="session")
def bad_anchor(pair_tree, bad_warning):
    return locate_ip(pair_tree, bad_warning)


def cfg_of(source, function):
    tree = parse_source(source, "<test>")
    return tree, build_cfg(tree.function_named(function))
