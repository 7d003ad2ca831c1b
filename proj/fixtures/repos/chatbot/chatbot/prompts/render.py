from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

TEMPLATE_DIR = Path(__file__).parent
_env = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), undefined=StrictUndefined)


def render_system_prompt(persona, facts):
    template = _env.get_template("system.jinja2")
    return template.render(persona=persona, memories=facts)
