import downclose


def test_import():
    assert downclose.__doc__
