# polytile: translational tilings by rational polygonal sets
