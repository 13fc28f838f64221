import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--large", action="store_true", default=False,
        help="run the multi-gigabyte L(114) / L(146) checks",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--large"):
        return
    skip = pytest.mark.skip(reason="needs --large (about 7 GB of RAM)")
    for item in items:
        if "large" in item.keywords:
            item.add_marker(skip)
