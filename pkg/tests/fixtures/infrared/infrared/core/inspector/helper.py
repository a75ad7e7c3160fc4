class SpecDictHelper:
    """Controls the spec dicts and provides useful methods to get spec info."""

    def __init__(self, spec_dict):
        self.spec_dict = spec_dict

    def get_parser_option_specs(self, command_name):
        """Gets all the options for the specified command"""
        for parser in self.spec_dict.get('subparsers', {}).values():
            if parser['name'] == command_name:
                return parser.get('options', {})
        return {}

    def get_option_spec(self, command_name, argument_name):
        """Gets the specification for the specified option name."""
        options = self.get_parser_option_specs(command_name)
        return options.get(argument_name, {})

    def iterate_parsers(self):
        """Iterates over the main parsers and subparsers."""
        for name, parser in self.spec_dict.get('subparsers', {}).items():
            yield dict(name=name, **parser)

    def iterate_option_specs(self):
        """Iterates over all the option specs.

        Returns pair of parser and option on every iteration.
        """
        for parser in self.iterate_parsers():
            for spec_option in parser.get('options', {}).values():
                yield parser, spec_option
