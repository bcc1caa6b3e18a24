use crate::corpus::Corpus;

use super::Question;

const PREAMBLE: &str =
    "Responda a la siguiente pregunta. No tenga en cuenta las preguntas anteriores.";

/// Instantiates the survey template for a question. The item description
/// comes from the corpus; the country is given by its Spanish name.
/// Lines are joined with `\n`, with no trailing newline.
pub fn render_prompt(question: &Question, corpus: &Corpus) -> Option<String> {
    let item = corpus.item(question.item())?;
    let country = question.country().spanish_name();
    let description = &item.description;
    let text = match question {
        Question::YesNo(q) => format!(
            "{PREAMBLE}\nUsted es de {country}.\n¿Suele utilizar el término «{variant}» para referirse a «{description}»? Responda únicamente con «Sí» o «No».",
            variant = q.variant,
        ),
        Question::MultipleChoice(q) => {
            let mut s = format!(
                "{PREAMBLE}\nUsted es de {country}.\n¿Qué expresión(es) suele usar para referirse a «{description}»? Las opciones son:\n"
            );
            for (i, option) in q.options.iter().enumerate() {
                s.push_str(&format!("{} {}\n", i + 1, option));
            }
            s.push_str(
                "Conteste solo con el número correspondiente a la opción. Puede elegir más de una opción; en ese caso, los números deberán ir separados por el signo «/» en orden ascendente.",
            );
            s
        }
    };
    Some(text)
}
