# -*- coding: utf-8 -*-

import hashlib
import json
import os

from colorama import Fore, Style

from thzqs.exceptions import ConfigException

INFO = 0
WARNING = 1
ERROR = 2


def print_console(msg, level=INFO, formatter=0):
    tabs, color = ["", ""]
    for _ in range(formatter):
        tabs += "    "
    if os.name == 'nt':
        print(tabs + msg)
        return
    if level == ERROR:
        color = Fore.RED
    elif level == WARNING:
        color = Fore.YELLOW
    print(color + tabs + msg + Style.RESET_ALL)


def load_json_file(filepath):
    try:
        with open(filepath, encoding="utf-8") as json_file:
            return json.load(json_file)
    except OSError as err:
        raise ConfigException("", f"File {filepath} not found. Msg: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigException("", f"{filepath}:{err.lineno}: invalid JSON ({err.msg})") from err
    except UnicodeDecodeError as err:
        raise ConfigException("", f"{filepath}:{decode_error_line(err)}: not valid UTF-8 ({err.reason})") from err


def decode_error_line(err):
    """Line number of the byte a UnicodeDecodeError stopped at."""
    return err.object[:err.start].count(b"\n") + 1


def dump_json(data):
    # sorted keys and a trailing newline, stable across runs
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json_file(filepath, data):
    with open(filepath, "w", encoding="utf-8", newline="\n") as json_file:
        json_file.write(dump_json(data))
    return filepath


def file_digest(filepath):
    digest = hashlib.sha256()
    with open(filepath, "rb") as file_desc:
        for chunk in iter(lambda: file_desc.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def deep_merge(base, override):
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path
