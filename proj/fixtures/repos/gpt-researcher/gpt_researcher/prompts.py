from datetime import datetime


def generate_search_queries_prompt(question, parent_query, max_iterations=3):
    task = f"{parent_query} - {question}" if parent_query else question
    return (
        f"Write {max_iterations} google search queries to search online that form an objective opinion "
        f'from the following task: "{task}"\n'
        f'You must respond with a list of strings in the following format: ["query 1", "query 2"].'
    )


def generate_report_prompt(question, context, report_format="apa", total_words=1000, language="english"):
    return (
        f'Information: """{context}"""\n\n'
        f"Using the above information, answer the following query or task: \"{question}\" in a detailed report.\n"
        f"The report should be at least {total_words} words and follow the {report_format} format.\n"
        f"You MUST write the report in the following language: {language}.\n"
        f"Assume that the current date is {datetime.now().strftime('%B %d, %Y')}."
    )


def generate_subtopic_report_prompt(current_subtopic, existing_headers, main_topic, context,
                                    report_format="apa", max_subsections=5, total_words=800):
    return (
        f'"Context":\n"{context}"\n\n'
        f'"Main Topic and Subtopic":\n'
        f"Using the latest information available, construct a detailed report on the subtopic: "
        f"{current_subtopic} under the main topic: {main_topic}.\n"
        f"You must limit the number of subsections to a maximum of {max_subsections}.\n"
        f'"Existing Subtopic Reports":\n{existing_headers}\n\n'
        f"Write at least {total_words} words in {report_format} format."
    )


def auto_agent_instructions():
    return (
        "This task involves researching a given topic, regardless of its complexity or the availability "
        "of a definitive answer. Choose the server that best matches the topic and return its role prompt "
        'as JSON: {"server": "...", "agent_role_prompt": "..."}'
    )


report_type_mapping = {
    "research_report": generate_report_prompt,
    "subtopic_report": generate_subtopic_report_prompt,
}


def build_report_prompt(report_type, **kwargs):
    prompt_fn = report_type_mapping.get(report_type, generate_report_prompt)
    return prompt_fn(**kwargs)
