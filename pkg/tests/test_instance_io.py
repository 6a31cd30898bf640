import logging

import allure
import pytest

from hboa.exceptions import InputError, ParseError
from hboa.models import NkSpec, SpinGlassSpec
from hboa.problems.instance_io import read_instance, write_instance
from hboa.problems.nk import generate_nk
from hboa.problems.spin_glass import generate_spin_glass

logger = logging.getLogger(__name__)


@allure.feature("Instance Files")
class TestInstanceFiles:
    @allure.title("NK instance survives a write and read")
    @pytest.mark.smoke
    @pytest.mark.oracle
    @pytest.mark.parametrize("shuffle", [False, True])
    def test_nk_round_trip(self, tmp_path, shuffle):
        spec = NkSpec(n=10, k=3, seed=17, shuffle=shuffle)
        problem = generate_nk(spec)
        path = write_instance(tmp_path / "nk.txt", problem, spec)

        loaded, loaded_spec = read_instance(path)
        assert loaded.same_structure(problem)
        assert loaded_spec == spec

        logger.info(f"NK round trip verified (shuffle={shuffle})")

    @allure.title("Tables come from the file, not from the header seed")
    @pytest.mark.oracle
    def test_file_over_seed(self, tmp_path):
        spec = NkSpec(n=8, k=2, seed=17)
        problem = generate_nk(spec)
        path = write_instance(tmp_path / "nk.txt", problem, spec)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(["NK 8 2 18"] + lines[1:]) + "\n")

        loaded, loaded_spec = read_instance(path)
        assert loaded_spec.seed == 18
        assert all((a == b).all() for a, b in zip(loaded.tables, problem.tables))
        assert not all((a == b).all() for a, b in zip(loaded.tables, generate_nk(loaded_spec).tables))

        logger.info("Instance tables read from the file")

    @allure.title("Spin glass instance keeps its couplings")
    @pytest.mark.oracle
    def test_spin_glass_round_trip(self, tmp_path):
        spec = SpinGlassSpec(L=3, seed=21)
        problem = generate_spin_glass(spec)
        loaded, loaded_spec = read_instance(write_instance(tmp_path / "sg.txt", problem, spec))

        assert loaded.same_structure(problem)
        assert loaded_spec.L == 3
        assert loaded_spec.seed == 21
        assert generate_spin_glass(loaded_spec).same_structure(problem)

        logger.info("Spin glass round trip verified")

    @allure.title("Truncated file is a parse error")
    @pytest.mark.oracle
    def test_truncated(self, tmp_path):
        spec = NkSpec(n=6, k=1, seed=2)
        path = write_instance(tmp_path / "nk.txt", generate_nk(spec), spec)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:4]) + "\n")

        with pytest.raises(ParseError) as error:
            read_instance(path)
        assert "expected 6 subset lines" in error.value.message

        logger.info(f"Truncated file rejected: {error.value.message}")

    @allure.title("Malformed fields are reported with line and field")
    @pytest.mark.oracle
    @pytest.mark.parametrize(
        "text, line, field",
        [
            ("", 1, "header"),
            ("XX 3 1 0\n", 1, "type"),
            ("NK 3 x 0\n", 1, "k"),
            ("NK 3 1 0 twisted\n", 1, "flags"),
            ("NK 3 1 0\n0 1 0 0 0 0\n1 2 0 0 0\n2 0 0 0 0 0\n", 3, "subset"),
            ("NK 3 1 0\n0 1 0 0 0 0\n1 2 0 zz 0 0\n2 0 0 0 0 0\n", 3, "table"),
            ("NK 3 1 0\n0 1 0 0 0 0\nq 2 0 0 0 0\n2 0 0 0 0 0\n", 3, "index"),
            ("NK 4 1 0\n0 1 0 0 0 0\n1 2 0 0 0 0\n2 3 0 0 0 0\n3 9 0 0 0 0\n", 5, "subset"),
            ("NK 3 1 0\n0 1 0 0 0 0\n1 2 0 0 0 0\n2 2 0 0 0 0\n", 4, "subset"),
            ("SG 2 0\n" + "0 1 1 -1 -1 1\n" * 2 + "2 3 2 -2 -2 2\n" + "0 1 1 -1 -1 1\n" * 5, 4, "table"),
        ],
    )
    def test_diagnostics(self, tmp_path, text, line, field):
        path = tmp_path / "bad.txt"
        path.write_text(text)

        with pytest.raises(ParseError) as error:
            read_instance(path)
        assert error.value.line == line
        assert error.value.field == field

        logger.info(f"Diagnostic: {error.value.message}")

    @allure.title("Hand-written decimal tables are accepted")
    @pytest.mark.oracle
    def test_decimal_entries(self, tmp_path):
        path = tmp_path / "hand.txt"
        path.write_text("NK 3 1 5\n0 1 0.1 0.2 0.3 0.4\n1 2 0 0 0 1\n2 0 0.5 0.5 0.5 0.5\n")

        problem, spec = read_instance(path)
        assert spec == NkSpec(n=3, k=1, seed=5)
        assert problem.subsets == ((0, 1), (1, 2), (2, 0))
        assert list(problem.tables[0]) == [0.1, 0.2, 0.3, 0.4]

        logger.info("Decimal instance read")

    @allure.title("Missing file is an input error")
    @pytest.mark.oracle
    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_instance(tmp_path / "absent.txt")

        logger.info("Missing file rejected")
