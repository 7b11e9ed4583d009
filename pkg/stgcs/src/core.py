import os
import csv
import yaml
import simdjson as json
from typing import Any, Dict, List, Optional, Sequence, Union

from .type_utils import PathLike
from ..utils import logger

usrdir = os.path.expanduser("~")


def _to_builtin(obj):
    """Recursively convert numpy scalars / arrays into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if hasattr(obj, 'tolist'):
        return _to_builtin(obj.tolist())
    if isinstance(obj, float):
        return float(obj)
    return obj


class File(object):
    @classmethod
    def join(cls, path, *paths):
        return os.path.join(path, *paths)

    @classmethod
    def exists(cls, filepath):
        return os.path.exists(filepath)

    @classmethod
    def pexists(cls, path, *paths):
        return os.path.exists(File.join(path, *paths))

    @classmethod
    def mkdirs(cls, directory):
        if directory:
            os.makedirs(directory, exist_ok=True)
        return directory

    @classmethod
    def getdir(cls, filepath):
        return os.path.abspath(os.path.dirname(os.fspath(filepath)))

    @classmethod
    def base(cls, filepath, with_ext=True):
        f = os.path.basename(os.fspath(filepath))
        if with_ext:
            return f
        return os.path.splitext(f)[0]

    @classmethod
    def ext(cls, filepath):
        _, e = os.path.splitext(os.path.basename(os.fspath(filepath)))
        return e

    @classmethod
    def mod_fname(cls, filename, newname=None, prefix=None, suffix=None, ext=None, directory=None, create_dirs=True):
        fname = newname or File.base(filename, with_ext=False)
        if ext:
            if not ext.startswith('.'): ext = '.' + ext
        else:
            ext = File.ext(filename)
        if prefix: fname = prefix + fname
        if suffix: fname += suffix
        directory = directory or File.getdir(filename)
        if create_dirs:
            File.mkdirs(directory)
        return File.join(directory, fname + ext)

    @classmethod
    def readfile(cls, filename, mode='r'):
        with open(filename, mode) as f:
            return f.read()

    @classmethod
    def textwrite(cls, data, filename, overwrite=True):
        mode = 'w' if overwrite or not File.exists(filename) else 'a'
        File.mkdirs(File.getdir(filename))
        with open(filename, mode) as f:
            if isinstance(data, list):
                for d in data:
                    f.write(d + '\n')
            else:
                f.write(data)
            f.flush()
        return filename

    # Json Methods
    @classmethod
    def jsonloads(cls, data: Union[str, bytes]):
        if isinstance(data, str):
            data = data.encode('utf8')
        return json.loads(data)

    @classmethod
    def jsonload(cls, filename):
        return File.jsonloads(File.readfile(filename, 'rb'))

    @classmethod
    def jsondumps(cls, obj, indent=2):
        return json.dumps(_to_builtin(obj), indent=indent, ensure_ascii=False)

    @classmethod
    def jsondump(cls, obj, filename, indent=2):
        return File.textwrite(File.jsondumps(obj, indent=indent) + '\n', filename, overwrite=True)

    # YAML Methods
    @classmethod
    def ydump(cls, data, filepath):
        File.mkdirs(File.getdir(filepath))
        with open(filepath, 'w') as f:
            return yaml.safe_dump(_to_builtin(data), stream=f, indent=2, sort_keys=False)

    @classmethod
    def yload(cls, filename):
        with open(filename, 'r') as f:
            return yaml.safe_load(f)

    # CSV Methods
    @classmethod
    def csvwrite(cls, data: Sequence[Dict[str, Any]], filename, keys: Optional[List[str]] = None, delimiter=','):
        keys = keys or (list(data[0].keys()) if data else [])
        File.mkdirs(File.getdir(filename))
        with open(filename, 'w', newline='') as f:
            writer = csv.DictWriter(f, keys, delimiter=delimiter, extrasaction='ignore')
            writer.writeheader()
            writer.writerows(data)
        logger.debug(f'Wrote {len(data)} rows to {filename}')
        return filename

    @classmethod
    def csvload(cls, filename):
        with open(filename, 'r', newline='') as f:
            return list(csv.DictReader(f))
