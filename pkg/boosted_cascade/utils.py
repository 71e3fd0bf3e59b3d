import json
import os
import tempfile


def parse_settings(settings):
    """Return a dict from a list of `key=value` strings, as given on the
    command line with repeated `--set` flags. Values that parse as JSON are
    decoded (so `3`, `0.5`, `true` and `[1, 2]` keep their type), anything
    else is kept as a string.
    """
    d = {}
    for setting in settings or []:
        if '=' not in setting:
            raise ValueError(f"Invalid setting '{setting}', expected key=value.")
        k, v = setting.split('=', 1)
        k = k.strip()
        if not k:
            raise ValueError(f"Invalid setting '{setting}', key is empty.")
        d[k] = decode_value(v)
    return d


def decode_value(text):
    try:
        return json.loads(text)
    except ValueError:
        return text


def format_real(x):
    """Shortest decimal text that reads back to the same float."""
    return repr(float(x))


def dumps_json(obj):
    # sorted keys and fixed indentation: identical content, identical bytes
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + '\n'


def atomic_write_text(path, text):
    """Writes `text` to `path` through a temporary file in the same
    directory, so readers never see a partially written file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with tempfile.NamedTemporaryFile(mode='w', delete=False, dir=directory,
                                     prefix='.' + os.path.basename(path) + '_',
                                     suffix='.tmp', newline='') as tmp:
        tmp.write(text)
        tmp_path = tmp.name
    try:
        os.replace(tmp_path, path)
    except OSError:
        os.remove(tmp_path)
        raise
    return path
