import collections

from infrared.core.inspector import helper
from infrared.core.utils import exceptions


class SpecParser:
    """Parses input arguments from different sources (cli, answer file)."""

    def __init__(self, subparser, spec_dict, vars_dir, defaults_dir, plugin_path):
        self.vars = vars_dir
        self.defaults = defaults_dir
        self.plugin_path = plugin_path
        self.spec_helper = helper.SpecDictHelper(spec_dict)
        self.parser = subparser

    def _get_defaults(self, default_getter_func):
        """Resolve arguments' values from cli or answers file."""
        result = collections.defaultdict(dict)
        for parser, option in self.spec_helper.iterate_option_specs():
            default_value = default_getter_func(option)
            if default_value is not None:
                result[parser['name']][option['name']] = default_value
        return result

    def get_spec_defaults(self):
        """Resolve arguments' values from spec and other sources."""
        def spec_default_getter(option):
            return option.get('default', None)
        return self._get_defaults(spec_default_getter)

    def get_env_defaults(self):
        """Get defaults from the environment variables."""
        def env_getter(option):
            return option.get('env_default', None)
        return self._get_defaults(env_getter)

    def get_silent_args(self, args):
        """List of silenced arguments."""
        silent_args_names = []
        for (parser_name, parser_dict, arg_name, arg_value,
             arg_spec) in self._iterate_received_arguments(args):
            if arg_spec and 'silent' in arg_spec:
                silent_args_names.extend(arg_spec['silent'])
        return list(set(silent_args_names))

    def _iterate_received_arguments(self, args):
        """Iterator helper method over all the received arguments."""
        for parser_name, parser_dict in args.items():
            for spec_parser in self.spec_helper.iterate_parsers():
                if spec_parser['name'] in args:
                    for arg_name, arg_val in parser_dict.items():
                        arg_spec = self.spec_helper.get_option_spec(
                            spec_parser['name'], arg_name)
                        yield (parser_name, parser_dict, arg_name, arg_val, arg_spec)

    def validate_requires_args(self, args):
        """Check if all the required arguments have been provided."""
        missing_args = {}
        for parser_name, parser_dict in args.items():
            for option in self.spec_helper.get_parser_option_specs(parser_name):
                if option.get('required') and option['name'] not in parser_dict:
                    missing_args.setdefault(parser_name, []).append(option['name'])
        if missing_args:
            raise exceptions.IRRequiredArgsMissingException(missing_args)
        return missing_args

    def get_answers_file_args(self, cli_args):
        """Resolve arguments' values from answers INI file."""
        file_result = {}
        for (parser_name, parser_dict, arg_name, arg_value,
             option_spec) in self._iterate_received_arguments(cli_args):
            file_result[parser_name] = file_result.get(parser_name, {})
            if option_spec and option_spec.get('action') == 'read-answers':
                file_result[parser_name][arg_name] = arg_value
        return file_result

    def get_nested_custom_and_control_args(self, args):
        """Split input arguments to control nested and custom."""
        control_args = {}
        nested = {}
        for option in self.spec_helper.iterate_option_specs():
            parser, spec = option
            if spec.get('is_shared_group_option'):
                control_args[spec['name']] = spec
            else:
                nested[spec['name']] = spec
        return nested, control_args

    def get_deprecated_args(self) -> collections.defaultdict:
        """Returning dict with options which deprecate others"""
        result = collections.defaultdict(dict)
        for parser, option in self.spec_helper.iterate_option_specs():
            if option.get('deprecates') is not None:
                result[parser['name']][option['deprecates']] = option['name']
        return result

    def validate_arg_deprecation(self, cli_args, answer_file_args):
        """Validates and prints the deprecated arguments."""
        for deprecated, deprecates in self.get_deprecated_args().items():
            for arg in deprecates.items():
                if arg[0] in cli_args or arg[0] in answer_file_args:
                    print("Argument '{}' was deprecated by '{}'".format(arg[0], arg[1]))

    def _convert_non_cli_args(self, parser_name, values_dict):
        """Casts arguments to correct types by modifying values_dict param."""
        for opt_name, opt_value in values_dict.items():
            file_option_spec = self.spec_helper.get_option_spec(parser_name, opt_name)
            if file_option_spec.get('type', None) in ['int', ] or \
                    file_option_spec.get('action', None) in ['count', ]:
                values_dict[opt_name] = int(opt_value)
        return values_dict

    def parse_args(self, arg_parser, args=None):
        """Parses all the arguments (cli, answers file)."""
        cli_args = arg_parser.parse_known_args(args)
        file_args = {}
        self.validate_arg_deprecation(cli_args, file_args)
        return self._convert_non_cli_args(self.parser, file_args)
