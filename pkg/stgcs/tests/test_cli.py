from stgcs.cli import EXIT_INVALID_INPUT, EXIT_OK, EXIT_PLAN_FAILED, build_parser, main
from stgcs.src.bench_io import InstanceFile, save_instance
from stgcs.src.core import File
from stgcs.src.gcsprog import VelocityBounds
from stgcs.src.geom import State
from stgcs.src.maps import get_map
from stgcs.src.mrmp import RobotTask

from .conftest import box


def test_n_range_parsing():
    args = build_parser().parse_args(['bench', '--n-range', '2-4', '--maps', 'empty'])
    assert args.n_range == [2, 3, 4]
    args = build_parser().parse_args(['bench', '--n-range', '1,5'])
    assert args.n_range == [1, 5]


def test_gen(tmp_path):
    out = File.join(str(tmp_path), 'gen')
    assert main(['gen', '--map', 'empty', '--n', '2', '--count', '2', '--out', out]) == EXIT_OK
    assert File.pexists(out, 'empty_n2_00.json')
    assert File.pexists(out, 'empty_n2_01.json')


def test_gen_crowded_map(tmp_path):
    assert main(['gen', '--map', 'corridor', '--n', '50', '--count', '1', '--out', str(tmp_path)]) == EXIT_INVALID_INPUT


def test_invalid_instance(tmp_path):
    path = File.join(str(tmp_path), 'bad.json')
    File.textwrite('{"schema": 7}', path)
    assert main(['plan', '--instance', path]) == EXIT_INVALID_INPUT


def test_plan_validate_and_render(tmp_path, capsys):
    inst_path = save_instance(InstanceFile.from_map(get_map('corridor')), File.join(str(tmp_path), 'corridor.json'))
    sol_path = File.join(str(tmp_path), 'sol.json')
    svg_path = File.join(str(tmp_path), 'sol.svg')
    code = main(['plan', '--instance', inst_path, '--method', 'sp', '--path-budget', '40',
                 '--out', sol_path, '--svg', svg_path])
    assert code == EXIT_OK
    assert '"success": true' in capsys.readouterr().out
    assert File.exists(sol_path) and File.exists(svg_path)
    assert main(['validate', '--instance', inst_path, '--solution', sol_path]) == EXIT_OK
    assert '"ok": true' in capsys.readouterr().out
    again = File.join(str(tmp_path), 'again.svg')
    assert main(['emit-svg', '--instance', inst_path, '--solution', sol_path, '--out', again]) == EXIT_OK
    assert File.readfile(again, 'rb') == File.readfile(svg_path, 'rb')


def test_plan_failure(tmp_path):
    inst = InstanceFile(
        map_sets=[box([0, 0], [10, 10])], t_max=5.0, vb=VelocityBounds.symmetric(0.5), safe_radius=0.5,
        robots=[RobotTask(State((0, 0), 0.0), (10, 10))],
    )
    path = save_instance(inst, File.join(str(tmp_path), 'short.json'))
    assert main(['plan', '--instance', path, '--method', 'sp']) == EXIT_PLAN_FAILED


def test_map_without_robots():
    assert main(['plan', '--map', 'empty']) == EXIT_INVALID_INPUT
