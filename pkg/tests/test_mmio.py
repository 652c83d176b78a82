import numpy as np
import pytest

from opnorm.mmio import MatrixMarketError, read_matrix_market, write_matrix_market


@pytest.mark.parametrize("fmt", ["array", "coordinate"])
def test_round_trip(tmp_path, fmt):
    A = np.array([[0.0, 0.25, 1.5], [0.25, 0.0, 2.0], [1.5, 2.0, 0.0]])
    path = tmp_path / "a.mtx"
    write_matrix_market(path, A, fmt=fmt)
    np.testing.assert_array_equal(read_matrix_market(path).entries, A)


def test_malformed_file(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("this is not a matrix\n1 2 3\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(path)


def test_asymmetric_file_is_rejected(tmp_path):
    path = tmp_path / "asym.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 2\n0\n1\n2\n0\n")
    with pytest.raises((MatrixMarketError, ValueError)):
        read_matrix_market(path)
