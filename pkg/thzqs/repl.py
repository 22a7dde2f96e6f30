# -*- coding: utf-8 -*-

import argparse
import sys

from thzqs.core import Thzqs
from thzqs.exceptions import ActionException, ConfigException, ThzqsException
from thzqs.tools import ERROR, print_console

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class REPL:
    HELP_MESSAGE = """
    Usage: thzqs [-flags] [action] [args...]

    Flags:

      -h, --help            - show this help.
      -v, --version         - display thzqs version.
      -c, --config PATH     - JSON file merged over the shipped defaults.
      -o, --out DIR         - output directory.
      -s, --seed N          - random seed of every simulated measurement.
      -f, --format csv|json - spectrum matrix format.
      -b, --branch NAME     - stokes, antistokes or a full label like stokes-backward.
      --temperature K       - crystal temperature.
      --repeats N           - scan repeats.
      --thickness M         - plate thickness in metres (0 for no sample scan).
      --index N             - plate refractive index used by analyze.
      --index-sigma S       - uncertainty of the plate index.
      --noiseless           - no shot, readout, background or laser noise.
      --blocked             - simulate with the idler arm blocked.
      --raw                 - also write the raw ROI counts.
      --no-plots            - skip the SVG plots.

    Actions:

      spectrum              - frequency-angular spectrum of the crystal.
      simulate              - reference (and sample) interferogram scans.
      analyze [files...]    - thickness from reference and sample scans;
                              a file given twice is analysed against itself.
      check-gain            - signal level against pump power, idler open and blocked.
      config                - display the merged configuration.
      version               - display thzqs version.

    Environment

      THZQS_OUT             - output directory overriding the configuration.

    """

    def __init__(self, config_path=None, overrides=None, blocked=False, raw=False):
        self.actions_with_arguments = ["analyze"]
        self._core = Thzqs(config_path, overrides, blocked=blocked, raw=raw)
        self.actions = {
            "spectrum": self._core.spectrum,
            "simulate": self._core.simulate,
            "sim": self._core.simulate,
            "analyze": self._core.analyze,
            "check-gain": self._core.check_gain,
            "gain": self._core.check_gain,
            "config": self._core.show_config,
            "v": self._core.version,
            "version": self._core.version,
            "h": self.show_help,
            "help": self.show_help
        }

    def show_help(self):
        print_console(self.HELP_MESSAGE)

    def run_action(self, action_args):
        if not action_args:
            self.show_help()
            raise ActionException("No action selected")
        if action_args.version:
            self.actions["version"]()
            return
        if len(action_args.args) == 0:
            self.show_help()
            raise ActionException("No action selected")
        action, args = action_args.args[0], action_args.args[1:]
        if action not in self.actions:
            raise ActionException(f"Invalid action {action} selected")
        if action in self.actions_with_arguments:
            if not args:
                raise ActionException(f"Action {action} requires scan files as arguments.")
            self.actions[action](args)
        elif args:
            raise ActionException(f"Action {action} takes no arguments.")
        else:
            self.actions[action]()


def build_parser():
    parser = argparse.ArgumentParser(prog="thzqs", add_help=False)
    parser.add_argument("args", help="run specified action. (Run thzqs help for more information)",
                        action="store", nargs="*", default=[])
    parser.add_argument("-h", "--help", dest="help", action="store_true")
    parser.add_argument("-v", "--version", dest="version", help="Show thzqs version", action="store_true")
    parser.add_argument("-c", "--config", dest="config", help="JSON configuration file")
    parser.add_argument("-o", "--out", dest="out", help="Output directory")
    parser.add_argument("-s", "--seed", dest="seed", type=int, help="Random seed")
    parser.add_argument("-f", "--format", dest="format", choices=["csv", "json"], help="Spectrum matrix format")
    parser.add_argument("-b", "--branch", dest="branch", help="Process branch")
    parser.add_argument("--temperature", dest="temperature", type=float, help="Crystal temperature in K")
    parser.add_argument("--repeats", dest="repeats", type=int, help="Scan repeats")
    parser.add_argument("--thickness", dest="thickness", type=float, help="Plate thickness in m")
    parser.add_argument("--index", dest="index", type=float, help="Plate refractive index")
    parser.add_argument("--index-sigma", dest="index_sigma", type=float, help="Plate index uncertainty")
    parser.add_argument("--noiseless", dest="noiseless", action="store_true", help="Disable every noise source")
    parser.add_argument("--blocked", dest="blocked", action="store_true", help="Block the idler arm")
    parser.add_argument("--raw", dest="raw", action="store_true", help="Write raw ROI counts")
    parser.add_argument("--no-plots", dest="no_plots", action="store_true", help="Skip SVG plots")
    return parser


def overrides_from(action_args):
    names = ("out", "seed", "format", "branch", "temperature", "repeats", "thickness", "index", "index_sigma",
             "noiseless", "no_plots")
    return {name: getattr(action_args, name) for name in names}


def main(argv=None):
    parser = build_parser()
    try:
        action_args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_OK
    try:
        repl = REPL(action_args.config, overrides_from(action_args), action_args.blocked, action_args.raw)
        if action_args.help:
            repl.show_help()
            return EXIT_OK
        repl.run_action(action_args)
    except ActionException as err:
        print_console(f"[x] Parameter error. Details: {err}", level=ERROR)
        return EXIT_USAGE
    except ConfigException as err:
        print_console(f"[x] Configuration error: {err}", level=ERROR)
        return EXIT_USAGE
    except ThzqsException as err:
        print_console(f"[x] thzqs Error: {err}", level=ERROR)
        return EXIT_RUNTIME
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
